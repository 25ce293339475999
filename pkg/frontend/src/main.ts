import { ApiClient } from "./api.js";
import { EstimateForm } from "./form.js";

const root = document.getElementById("app");
if (root) {
  const form = new EstimateForm(root, new ApiClient(""));
  void form.init();
}
