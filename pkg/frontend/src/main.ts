// Browser entry point: mount the drill app on #app once the page is ready.

import { DrillApi } from "./api.js";
import { bootstrap } from "./app.js";

function mount(): void {
  const root = document.getElementById("app");
  if (root !== null) {
    bootstrap(root, new DrillApi(""));
  }
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", mount);
} else {
  mount();
}
