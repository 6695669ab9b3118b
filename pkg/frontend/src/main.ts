/** Entry point: wire the store to a result service and mount the app.
 *
 * The service base URL comes from the `?api=` query parameter, falling
 * back to port 8177 on the page's host (the CLI's default serve port).
 */

import { ServiceClient } from "./api.js";
import { buildApp } from "./app.js";
import { FrontierStore } from "./store.js";

const params = new URLSearchParams(window.location.search);
const base =
  params.get("api") ??
  `http://${window.location.hostname || "127.0.0.1"}:8177`;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const store = new FrontierStore(new ServiceClient(base));
buildApp(root, store);
void store.load();
