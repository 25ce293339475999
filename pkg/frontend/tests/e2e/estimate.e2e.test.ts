/**
 * End-to-end check against a running fixture-backed service.
 *
 * Start one with:  python3 ../scripts/serve_fixture.py
 * then run:        SDEE_SERVICE_URL=http://127.0.0.1:8035 \
 *                  SDEE_QUERY_FILE=fixture_service/ingest/compression_query.txt \
 *                  npm run e2e
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../../src/api.js";

const serviceUrl = process.env.SDEE_SERVICE_URL;
const queryFile = process.env.SDEE_QUERY_FILE;

describe.skipIf(!serviceUrl || !queryFile)("fixture-backed service", () => {
  it("serves the 11 abstract categories", async () => {
    const api = new ApiClient(serviceUrl!);
    const categories = await api.getCategories();
    expect(categories.abstract.length).toBe(11);
    expect(Object.keys(categories.by_group).sort()).toEqual([...categories.abstract].sort());
  });

  it("returns the corpus's compression library as top match for its description", async () => {
    const api = new ApiClient(serviceUrl!);
    const description = readFileSync(queryFile!, "utf-8");
    const result = await api.postEstimate({
      title: "",
      description,
      languages: [],
      category: "Software library",
      subcategory: "compression-libraries",
      operating_systems: [],
      features: [],
      k: 1,
    });
    expect(result.matches.length).toBeGreaterThan(0);
    expect(`${result.matches[0].owner}/${result.matches[0].repo}`).toBe("polaris/densitypack");
    expect(result.matches[0].similarity).toBe(1.0);
    expect(result.effort_person_months).toBeGreaterThan(0);
  });
});
