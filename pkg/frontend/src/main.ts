/** Browser entry point: boot the app against the serving origin. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { defaultEventSourceFactory } from "./events.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const app = new App(root, {
  api: new ApiClient(""),
  eventSourceFactory: defaultEventSourceFactory,
});

void app.start();
