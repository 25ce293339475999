/** The single-page estimation form and its result panel.
 *
 * One estimate request is in flight at a time; a resubmission aborts
 * the previous request. Failed submissions leave every input exactly
 * as the user filled it.
 */

import {
  ApiClient,
  CategoriesPayload,
  EstimateRequestBody,
  EstimateResponse,
  MatchPayload,
  NoMatchError,
  ValidationError,
} from "./api.js";
import { formatEffort, formatSimilarity } from "./format.js";

export interface FeatureRow {
  name: string;
  description: string;
}

export interface FormState {
  title: string;
  description: string;
  languages: string;
  category: string;
  subcategory: string;
  operatingSystems: string;
  features: FeatureRow[];
  k: number;
}

function splitCommaList(raw: string): string[] {
  return raw
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0);
}

/** The exact request body the service expects, derived from form state. */
export function requestBody(state: FormState): EstimateRequestBody {
  return {
    title: state.title,
    description: state.description,
    languages: splitCommaList(state.languages),
    category: state.category,
    subcategory: state.subcategory,
    operating_systems: splitCommaList(state.operatingSystems),
    features: state.features
      .filter((row) => row.name.trim() !== "" || row.description.trim() !== "")
      .map((row) => ({ name: row.name, description: row.description })),
    k: state.k,
  };
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export class EstimateForm {
  private categories: CategoriesPayload | null = null;
  private inflight: AbortController | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  async init(): Promise<void> {
    this.renderSkeleton();
    await this.loadCategories();
  }

  // ---- rendering -------------------------------------------------------

  private renderSkeleton(): void {
    this.root.innerHTML = "";
    this.root.append(el("div", { id: "banner", hidden: "" }));

    const form = el("form", { id: "estimate-form" });
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });

    form.append(
      this.labeled("Software product title", el("input", { id: "title", type: "text" })),
      this.labeled(
        "Software description",
        el("textarea", { id: "description", rows: "6" }),
        el("div", { class: "field-error", "data-field": "description", hidden: "" }),
      ),
      this.labeled(
        "Preferred programming languages (comma separated)",
        el("input", { id: "languages", type: "text" }),
      ),
      this.labeled("Type of software", this.categorySelect()),
      this.labeled("Sub-category", el("select", { id: "subcategory" })),
      this.labeled(
        "Supported operating systems (comma separated)",
        el("input", { id: "operating-systems", type: "text" }),
      ),
    );

    const features = el("fieldset", { id: "features" });
    features.append(el("legend", {}, "Product features"));
    form.append(features);
    const addButton = el("button", { id: "add-feature", type: "button" }, "Add feature");
    addButton.addEventListener("click", () => this.addFeatureRow());
    form.append(addButton);

    const kInput = el("input", { id: "k", type: "number", min: "1", value: "2" });
    form.append(this.labeled("Similar projects to combine (k)", kInput));

    const submit = el("button", { id: "submit", type: "submit" }, "Estimate effort");
    submit.disabled = true;
    form.append(submit);

    form.addEventListener("input", () => this.refreshSubmitState());
    form.addEventListener("change", () => this.refreshSubmitState());

    this.root.append(form, el("section", { id: "result" }));
  }

  private labeled(caption: string, ...controls: HTMLElement[]): HTMLElement {
    const wrapper = el("div", { class: "field" });
    const label = el("label", {}, caption);
    wrapper.append(label, ...controls);
    return wrapper;
  }

  private categorySelect(): HTMLSelectElement {
    const select = el("select", { id: "category" });
    select.append(el("option", { value: "" }, "Select a category"));
    select.addEventListener("change", () => this.populateSubcategories());
    return select;
  }

  private async loadCategories(): Promise<void> {
    const banner = this.query<HTMLElement>("#banner");
    try {
      this.categories = await this.api.getCategories();
    } catch {
      banner.hidden = false;
      banner.innerHTML = "";
      banner.append(el("span", {}, "Could not load categories. "));
      const retry = el("button", { id: "retry", type: "button" }, "Retry");
      retry.addEventListener("click", () => void this.loadCategories());
      banner.append(retry);
      return;
    }
    banner.hidden = true;
    const select = this.query<HTMLSelectElement>("#category");
    const current = select.value;
    select.innerHTML = "";
    select.append(el("option", { value: "" }, "Select a category"));
    for (const group of this.categories.abstract) {
      select.append(el("option", { value: group }, group));
    }
    select.value = current;
    this.populateSubcategories();
  }

  private populateSubcategories(): void {
    const group = this.query<HTMLSelectElement>("#category").value;
    const select = this.query<HTMLSelectElement>("#subcategory");
    const current = select.value;
    select.innerHTML = "";
    select.append(el("option", { value: "" }, "Select a sub-category"));
    const entries = this.categories?.by_group[group] ?? [];
    for (const entry of entries) {
      select.append(el("option", { value: entry.id }, entry.name));
    }
    if ([...select.options].some((option) => option.value === current)) {
      select.value = current;
    }
  }

  addFeatureRow(name = "", description = ""): void {
    const row = el("div", { class: "feature-row" });
    const nameInput = el("input", { class: "feature-name", type: "text", placeholder: "Feature name" });
    nameInput.value = name;
    const descInput = el("input", {
      class: "feature-desc",
      type: "text",
      placeholder: "Feature description",
    });
    descInput.value = description;
    const remove = el("button", { class: "remove-feature", type: "button" }, "Remove");
    remove.addEventListener("click", () => row.remove());
    row.append(nameInput, descInput, remove);
    this.query<HTMLElement>("#features").append(row);
  }

  // ---- state -----------------------------------------------------------

  readState(): FormState {
    const features = [...this.root.querySelectorAll<HTMLElement>(".feature-row")].map((row) => ({
      name: row.querySelector<HTMLInputElement>(".feature-name")!.value,
      description: row.querySelector<HTMLInputElement>(".feature-desc")!.value,
    }));
    return {
      title: this.query<HTMLInputElement>("#title").value,
      description: this.query<HTMLTextAreaElement>("#description").value,
      languages: this.query<HTMLInputElement>("#languages").value,
      category: this.query<HTMLSelectElement>("#category").value,
      subcategory: this.query<HTMLSelectElement>("#subcategory").value,
      operatingSystems: this.query<HTMLInputElement>("#operating-systems").value,
      features,
      k: Number(this.query<HTMLInputElement>("#k").value) || 2,
    };
  }

  applyState(state: FormState): void {
    this.query<HTMLInputElement>("#title").value = state.title;
    this.query<HTMLTextAreaElement>("#description").value = state.description;
    this.query<HTMLInputElement>("#languages").value = state.languages;
    this.query<HTMLSelectElement>("#category").value = state.category;
    this.populateSubcategories();
    this.query<HTMLSelectElement>("#subcategory").value = state.subcategory;
    this.query<HTMLInputElement>("#operating-systems").value = state.operatingSystems;
    this.query<HTMLInputElement>("#k").value = String(state.k);
    for (const row of this.root.querySelectorAll(".feature-row")) row.remove();
    for (const feature of state.features) this.addFeatureRow(feature.name, feature.description);
    this.refreshSubmitState();
  }

  private refreshSubmitState(): void {
    const state = this.readState();
    const valid = state.description.trim() !== "" && state.category !== "";
    this.query<HTMLButtonElement>("#submit").disabled = !valid;
  }

  // ---- submission ------------------------------------------------------

  async submit(): Promise<void> {
    this.clearErrors();
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const body = requestBody(this.readState());
    try {
      const response = await this.api.postEstimate(body, controller.signal);
      this.renderResult(response);
    } catch (error) {
      if (controller.signal.aborted) return; // superseded by a newer submit
      if (error instanceof ValidationError) {
        this.showFieldErrors(error);
      } else if (error instanceof NoMatchError) {
        this.renderNoMatch(error);
      } else {
        this.showSubmitError("Estimation request failed. Please try again.");
      }
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  private clearErrors(): void {
    for (const node of this.root.querySelectorAll<HTMLElement>(".field-error")) {
      node.hidden = true;
      node.textContent = "";
    }
    this.root.querySelector(".submit-error")?.remove();
  }

  private showFieldErrors(error: ValidationError): void {
    let placed = false;
    for (const node of this.root.querySelectorAll<HTMLElement>(".field-error")) {
      const message = error.messageFor(node.dataset.field ?? "");
      if (message) {
        node.textContent = message;
        node.hidden = false;
        placed = true;
      }
    }
    if (!placed) this.showSubmitError("The request was rejected; check the form fields.");
  }

  private showSubmitError(message: string): void {
    const note = el("div", { class: "submit-error" }, message);
    this.query<HTMLElement>("#result").before(note);
  }

  private matchCard(match: MatchPayload): HTMLElement {
    const card = el("li", { class: "match-card" });
    card.append(
      el("span", { class: "match-repo" }, `${match.owner}/${match.repo}`),
      el("span", { class: "match-similarity" }, formatSimilarity(match.similarity)),
      el("span", { class: "match-effort" }, formatEffort(match.effort_person_months)),
      el("p", { class: "match-snippet" }, match.snippet),
    );
    return card;
  }

  private renderResult(response: EstimateResponse): void {
    const panel = this.query<HTMLElement>("#result");
    panel.innerHTML = "";
    panel.append(
      el(
        "h2",
        { class: "estimate-header" },
        `Estimated effort: ${formatEffort(response.effort_person_months)}`,
      ),
      el(
        "p",
        { class: "estimate-meta" },
        `Combined from ${response.k_used} similar project(s); model ${response.model_id}`,
      ),
    );
    const list = el("ol", { id: "matches" });
    for (const match of response.matches) list.append(this.matchCard(match));
    panel.append(list);
  }

  private renderNoMatch(error: NoMatchError): void {
    const panel = this.query<HTMLElement>("#result");
    panel.innerHTML = "";
    const box = el("div", { class: "no-match-panel" });
    box.append(
      el("h2", {}, "No sufficiently similar software found"),
      el("p", {}, error.payload.detail),
    );
    const best = error.payload.best_below_threshold;
    if (best) {
      box.append(el("p", { class: "no-match-hint" }, "Closest non-qualifying match:"));
      box.append(this.matchCard(best));
    }
    panel.append(box);
  }

  private query<T extends Element>(selector: string): T {
    const node = this.root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  }
}
