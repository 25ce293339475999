/** Typed client for the estimation service API. */

export interface CategoryEntry {
  id: string;
  name: string;
}

export interface CategoriesPayload {
  abstract: string[];
  by_group: Record<string, CategoryEntry[]>;
}

export interface FeatureBody {
  name: string;
  description: string;
}

export interface EstimateRequestBody {
  title: string;
  description: string;
  languages: string[];
  category: string;
  subcategory: string;
  operating_systems: string[];
  features: FeatureBody[];
  k: number;
}

export interface MatchPayload {
  owner: string;
  repo: string;
  similarity: number;
  effort_person_months: number;
  snippet: string;
}

export interface EstimateResponse {
  effort_person_months: number;
  k_used: number;
  alpha_hat: number;
  model_id: string;
  matches: MatchPayload[];
}

export interface FieldError {
  loc: (string | number)[];
  msg: string;
}

export interface NoMatchPayload {
  detail: string;
  best_below_threshold: MatchPayload | null;
}

export class ValidationError extends Error {
  constructor(public readonly errors: FieldError[]) {
    super("request failed validation");
  }

  /** First message attached to a given body field, if any. */
  messageFor(field: string): string | null {
    for (const item of this.errors) {
      if (item.loc.some((part) => part === field)) return item.msg;
    }
    return null;
  }
}

export class NoMatchError extends Error {
  constructor(public readonly payload: NoMatchPayload) {
    super(payload.detail);
  }
}

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async getCategories(): Promise<CategoriesPayload> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/categories`);
    if (!response.ok) {
      throw new ApiError(response.status, `categories request failed (${response.status})`);
    }
    return (await response.json()) as CategoriesPayload;
  }

  async postEstimate(
    body: EstimateRequestBody,
    signal?: AbortSignal,
  ): Promise<EstimateResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/estimate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (response.status === 422) {
      const payload = await response.json();
      throw new ValidationError((payload.detail ?? []) as FieldError[]);
    }
    if (response.status === 404) {
      throw new NoMatchError((await response.json()) as NoMatchPayload);
    }
    if (!response.ok) {
      throw new ApiError(response.status, `estimate request failed (${response.status})`);
    }
    return (await response.json()) as EstimateResponse;
  }
}
