import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { TrialView } from "./ui.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const api = new ApiClient("");
  const controller = new SessionController(api);

  let datasets: import("./state.js").DatasetInfo[] = [];
  try {
    datasets = await api.listDatasets();
  } catch {
    // start screen shows the error banner and a retry button
  }
  new TrialView(root, controller, datasets);

  controller.subscribe((state) => {
    if (state.sessionId) {
      localStorage.setItem("webnav-session", state.sessionId);
    } else {
      localStorage.removeItem("webnav-session");
    }
  });

  const stored = localStorage.getItem("webnav-session");
  if (stored) {
    try {
      await controller.resume(stored);
    } catch {
      localStorage.removeItem("webnav-session");
    }
  }
}

void boot();
