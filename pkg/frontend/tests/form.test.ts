import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, CategoriesPayload, EstimateResponse } from "../src/api.js";
import { EstimateForm, requestBody } from "../src/form.js";

const CATEGORIES: CategoriesPayload = {
  abstract: [
    "Software library",
    "Software utilities & plugin",
    "Software tool",
    "Software metrics",
    "Software driving engine",
    "A software framework",
    "Software middleware",
    "Software client",
    "Software server",
    "Software driver",
    "Software file system",
  ],
  by_group: {
    "Software library": [
      { id: "compression-libraries", name: "Compression Libraries" },
      { id: "json-libraries", name: "JSON Libraries" },
    ],
    "Software utilities & plugin": [{ id: "build-plugins", name: "Build Tool Plugins" }],
    "Software tool": [{ id: "code-analyzers", name: "Static Code Analyzers" }],
    "Software metrics": [],
    "Software driving engine": [],
    "A software framework": [{ id: "web-frameworks", name: "Web Application Frameworks" }],
    "Software middleware": [],
    "Software client": [],
    "Software server": [],
    "Software driver": [],
    "Software file system": [],
  },
};

const ESTIMATE: EstimateResponse = {
  effort_person_months: 12.3456,
  k_used: 2,
  alpha_hat: 1.0,
  model_id: "pvdbow-e20-v16-n60-s7",
  matches: [
    {
      owner: "polaris",
      repo: "densitypack",
      similarity: 0.97531,
      effort_person_months: 12.4,
      snippet: "fast lossless compression library",
    },
    {
      owner: "compressionworks",
      repo: "compression-03",
      similarity: 0.8421,
      effort_person_months: 11.1,
      snippet: "block codec",
    },
  ],
};

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function categoriesFetch(): ReturnType<typeof vi.fn> {
  return vi.fn(async (url: string) => {
    if (url.endsWith("/api/v1/categories")) return jsonResponse(CATEGORIES);
    throw new Error(`unexpected url ${url}`);
  });
}

async function mountForm(fetchImpl: ReturnType<typeof vi.fn>): Promise<EstimateForm> {
  document.body.innerHTML = '<main id="app"></main>';
  const form = new EstimateForm(
    document.getElementById("app") as HTMLElement,
    new ApiClient("", fetchImpl as never),
  );
  await form.init();
  return form;
}

function setValue(selector: string, value: string): void {
  const node = document.querySelector(selector) as HTMLInputElement;
  node.value = value;
  node.dispatchEvent(new Event("input", { bubbles: true }));
  node.dispatchEvent(new Event("change", { bubbles: true }));
}

function fillMinimalForm(): void {
  setValue("#description", "a compression library");
  setValue("#category", "Software library");
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("category rendering", () => {
  it("renders exactly the 11 abstract groups", async () => {
    await mountForm(categoriesFetch());
    const options = document.querySelectorAll("#category option");
    // placeholder + 11 groups
    expect(options.length).toBe(12);
    const labels = [...options].slice(1).map((o) => o.textContent);
    expect(labels).toEqual(CATEGORIES.abstract);
  });

  it("selecting a group swaps the subcategory list", async () => {
    await mountForm(categoriesFetch());
    setValue("#category", "Software library");
    let ids = [...document.querySelectorAll("#subcategory option")].map(
      (o) => (o as HTMLOptionElement).value,
    );
    expect(ids).toEqual(["", "compression-libraries", "json-libraries"]);

    setValue("#category", "A software framework");
    ids = [...document.querySelectorAll("#subcategory option")].map(
      (o) => (o as HTMLOptionElement).value,
    );
    expect(ids).toEqual(["", "web-frameworks"]);
  });

  it("endpoint failure shows a retry banner and keeps the form usable", async () => {
    const failing = vi.fn(async () => {
      throw new Error("network down");
    });
    await mountForm(failing);
    const banner = document.getElementById("banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("Could not load categories");
    expect(document.getElementById("estimate-form")).not.toBeNull();

    // retry succeeds once the endpoint recovers
    failing.mockImplementation(async () => jsonResponse(CATEGORIES));
    (document.getElementById("retry") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect((document.getElementById("banner") as HTMLElement).hidden).toBe(true);
    });
    expect(document.querySelectorAll("#category option").length).toBe(12);
  });
});

describe("submit gating", () => {
  it("submit stays disabled until description and category are set", async () => {
    await mountForm(categoriesFetch());
    const submit = document.getElementById("submit") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
    setValue("#description", "something to build");
    expect(submit.disabled).toBe(true);
    setValue("#category", "Software library");
    expect(submit.disabled).toBe(false);
    setValue("#description", "   ");
    expect(submit.disabled).toBe(true);
  });
});

describe("feature rows", () => {
  it("removing a row keeps sibling contents intact", async () => {
    const form = await mountForm(categoriesFetch());
    form.addFeatureRow();
    form.addFeatureRow();
    const rows = document.querySelectorAll(".feature-row");
    (rows[0].querySelector(".feature-name") as HTMLInputElement).value = "first";
    (rows[1].querySelector(".feature-name") as HTMLInputElement).value = "second";
    (rows[1].querySelector(".feature-desc") as HTMLInputElement).value = "kept";

    (rows[0].querySelector(".remove-feature") as HTMLButtonElement).click();
    const remaining = document.querySelectorAll(".feature-row");
    expect(remaining.length).toBe(1);
    expect((remaining[0].querySelector(".feature-name") as HTMLInputElement).value).toBe("second");
    expect((remaining[0].querySelector(".feature-desc") as HTMLInputElement).value).toBe("kept");
  });
});

describe("estimate submission", () => {
  it("POSTs the exact request body shape", async () => {
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string, init?: RequestInit) => {
      if (url.endsWith("/api/v1/categories")) return jsonResponse(CATEGORIES);
      expect(url).toBe("/api/v1/estimate");
      expect(init?.method).toBe("POST");
      const body = JSON.parse(init?.body as string);
      expect(body).toEqual({
        title: "packer",
        description: "a compression library",
        languages: ["rust", "c"],
        category: "Software library",
        subcategory: "compression-libraries",
        operating_systems: ["linux"],
        features: [{ name: "speed", description: "fast mode" }],
        k: 3,
      });
      return jsonResponse(ESTIMATE);
    });
    const form = await mountForm(fetchImpl);
    setValue("#title", "packer");
    fillMinimalForm();
    setValue("#languages", " rust , c ");
    setValue("#subcategory", "compression-libraries");
    setValue("#operating-systems", "linux");
    setValue("#k", "3");
    form.addFeatureRow("speed", "fast mode");
    await form.submit();
    const posts = fetchImpl.mock.calls.filter(([u]) => String(u).endsWith("/estimate"));
    expect(posts.length).toBe(1);
  });

  it("renders the estimate header and server-ordered match cards", async () => {
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string) =>
      url.endsWith("/api/v1/categories") ? jsonResponse(CATEGORIES) : jsonResponse(ESTIMATE),
    );
    const form = await mountForm(fetchImpl);
    fillMinimalForm();
    await form.submit();

    const header = document.querySelector(".estimate-header") as HTMLElement;
    // 1 decimal, straight from the response payload
    expect(header.textContent).toBe("Estimated effort: 12.3 person-months");

    const cards = document.querySelectorAll(".match-card");
    expect(cards.length).toBe(2);
    expect(cards[0].querySelector(".match-repo")?.textContent).toBe("polaris/densitypack");
    expect(cards[1].querySelector(".match-repo")?.textContent).toBe(
      "compressionworks/compression-03",
    );
    // similarity as a percentage with 2 decimals
    expect(cards[0].querySelector(".match-similarity")?.textContent).toBe("97.53%");
    expect(cards[1].querySelector(".match-similarity")?.textContent).toBe("84.21%");
    expect(cards[0].querySelector(".match-effort")?.textContent).toBe("12.4 person-months");
    expect(cards[0].querySelector(".match-snippet")?.textContent).toContain("lossless");
  });

  it("every displayed number originates from the response payload", async () => {
    const payload: EstimateResponse = {
      ...ESTIMATE,
      effort_person_months: 77.777,
      matches: [{ ...ESTIMATE.matches[0], similarity: 0.123456, effort_person_months: 3.21 }],
    };
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string) =>
      url.endsWith("/api/v1/categories") ? jsonResponse(CATEGORIES) : jsonResponse(payload),
    );
    const form = await mountForm(fetchImpl);
    fillMinimalForm();
    await form.submit();
    const text = (document.getElementById("result") as HTMLElement).textContent ?? "";
    expect(text).toContain("77.8 person-months"); // toFixed(1) of payload value
    expect(text).toContain("12.35%"); // payload similarity as percent
    expect(text).toContain("3.2 person-months");
    // nothing resembling a recomputed aggregate appears
    expect(text).not.toContain("40.49"); // e.g. any averaged invention
  });

  it("422 shows a field-level message under the description", async () => {
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string) =>
      url.endsWith("/api/v1/categories")
        ? jsonResponse(CATEGORIES)
        : jsonResponse(
            { detail: [{ loc: ["body", "description"], msg: "description too vague" }] },
            422,
          ),
    );
    const form = await mountForm(fetchImpl);
    fillMinimalForm();
    await form.submit();
    const error = document.querySelector('.field-error[data-field="description"]') as HTMLElement;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toBe("description too vague");
  });

  it("404 renders the no-match panel with the closest non-qualifying match", async () => {
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string) =>
      url.endsWith("/api/v1/categories")
        ? jsonResponse(CATEGORIES)
        : jsonResponse(
            {
              detail: "no stored project reaches similarity 1.0",
              best_below_threshold: {
                owner: "gameworks",
                repo: "game-02",
                similarity: 0.61,
                effort_person_months: 120.0,
                snippet: "engine",
              },
            },
            404,
          ),
    );
    const form = await mountForm(fetchImpl);
    fillMinimalForm();
    await form.submit();
    const panel = document.querySelector(".no-match-panel") as HTMLElement;
    expect(panel.textContent).toContain("No sufficiently similar software");
    expect(panel.textContent).toContain("Closest non-qualifying match");
    expect(panel.querySelector(".match-repo")?.textContent).toBe("gameworks/game-02");
    expect(panel.querySelector(".match-similarity")?.textContent).toBe("61.00%");
  });

  it("form state survives a failed submit", async () => {
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string) =>
      url.endsWith("/api/v1/categories")
        ? jsonResponse(CATEGORIES)
        : jsonResponse({ detail: [{ loc: ["body", "description"], msg: "rejected" }] }, 422),
    );
    const form = await mountForm(fetchImpl);
    setValue("#title", "my tool");
    fillMinimalForm();
    setValue("#languages", "python");
    form.addFeatureRow("caching", "lru layer");
    const before = requestBody(form.readState());
    await form.submit();
    const after = requestBody(form.readState());
    expect(after).toEqual(before);
    expect((document.getElementById("title") as HTMLInputElement).value).toBe("my tool");
  });

  it("a resubmission aborts the in-flight request", async () => {
    const signals: AbortSignal[] = [];
    const fetchImpl = categoriesFetch();
    fetchImpl.mockImplementation(async (url: string, init?: RequestInit) => {
      if (url.endsWith("/api/v1/categories")) return jsonResponse(CATEGORIES);
      signals.push(init!.signal as AbortSignal);
      if (signals.length === 1) {
        // first request hangs until aborted
        return new Promise<Response>((_, reject) => {
          (init!.signal as AbortSignal).addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
        });
      }
      return jsonResponse(ESTIMATE);
    });
    const form = await mountForm(fetchImpl);
    fillMinimalForm();
    const first = form.submit();
    const second = form.submit();
    await Promise.all([first, second]);
    expect(signals.length).toBe(2);
    expect(signals[0].aborted).toBe(true);
    expect(signals[1].aborted).toBe(false);
    // the late result panel comes from the second request
    expect(document.querySelector(".estimate-header")?.textContent).toContain("12.3");
  });
});

describe("form state round trip", () => {
  it("serialize then reload reproduces the identical request body", async () => {
    const form = await mountForm(categoriesFetch());
    setValue("#title", "round trip");
    fillMinimalForm();
    setValue("#subcategory", "json-libraries");
    setValue("#languages", "go, zig");
    setValue("#operating-systems", "linux, macos");
    setValue("#k", "4");
    form.addFeatureRow("alpha", "one");
    form.addFeatureRow("beta", "two");

    const state = form.readState();
    const body = requestBody(state);
    const reloaded = await mountForm(categoriesFetch());
    reloaded.applyState(state);
    expect(requestBody(reloaded.readState())).toEqual(body);
  });
});
