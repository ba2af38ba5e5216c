import { ApiClient } from "./api.js";
import { boot } from "./app.js";

const root = document.getElementById("app");
if (root) {
  // served under /ui/ by the query service: endpoints live at the origin root
  void boot(root, new ApiClient(""));
}
