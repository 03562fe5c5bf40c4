/** Thin fetch client for the campaign service JSON API.
 *
 * Mirrors the server routes one to one and does no validation of its own:
 * every rule the UI cares about is enforced server-side, the client only
 * translates HTTP errors into `ApiError` so screens can react to them.
 */

export interface Progress {
  collected: number;
  expected: number;
}

export interface ImageRef {
  id: string;
  uri: string | null;
}

export interface CriterionRow {
  rating: number;
  label: string;
  criteria: string;
}

export interface PairRef {
  image_id: string;
  src_index: number;
  tgt_index: number;
  src_text: string;
  tgt_text: string;
}

/** Lease payload as served by POST /campaigns/{id}/lease.
 *
 * Caption tasks carry `language`, `guidelines` and `image`; rating tasks
 * carry `criteria` and `pair`.  Timestamps are epoch seconds.
 */
export interface TaskPayload {
  campaign_id: string;
  kind: "caption" | "rating";
  task_id: string;
  lease_id: string;
  issued_at: number;
  expires_at: number;
  quota: number;
  progress: Progress;
  language?: string;
  guidelines?: string[];
  image?: ImageRef;
  criteria?: CriterionRow[];
  pair?: PairRef;
}

export interface ExportResult {
  body: string;
  /** `X-Complete` header, "collected/expected". */
  complete: string;
}

export class ApiError extends Error {
  status: number;
  error: string;
  detail: string;

  constructor(status: number, body: { error?: string; detail?: string }) {
    super(body.detail ?? body.error ?? `HTTP ${status}`);
    this.name = "ApiError";
    this.status = status;
    this.error = body.error ?? "";
    this.detail = body.detail ?? "";
  }
}

async function raiseFor(response: Response): Promise<never> {
  let body: { error?: string; detail?: string } = {};
  try {
    body = await response.json();
  } catch {
    // non-JSON error body: keep the status only
  }
  throw new ApiError(response.status, body);
}

export class CampaignApi {
  readonly baseUrl: string;

  /** @param baseUrl origin prefix, "" when served by the campaign service */
  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async post(path: string, body: unknown): Promise<Response> {
    return fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async createCampaign(spec: object): Promise<{ id: string }> {
    const response = await this.post("/campaigns", spec);
    if (response.status !== 201) await raiseFor(response);
    return response.json();
  }

  async closeCampaign(campaignId: string): Promise<void> {
    const response = await this.post(`/campaigns/${campaignId}/close`, {});
    if (!response.ok) await raiseFor(response);
  }

  /** Lease the next task; null when the campaign has nothing to hand out. */
  async lease(
    campaignId: string,
    workerId: string,
    attributes: Record<string, string> = {},
  ): Promise<TaskPayload | null> {
    const response = await this.post(`/campaigns/${campaignId}/lease`, {
      worker_id: workerId,
      attributes,
    });
    if (response.status === 204) return null;
    if (response.status !== 200) await raiseFor(response);
    return response.json();
  }

  async submitCaption(
    taskId: string,
    leaseId: string,
    text: string,
  ): Promise<void> {
    // task ids contain "/" segments; the server route matches them as a path
    const response = await this.post(`/tasks/${taskId}/caption`, {
      lease_id: leaseId,
      text,
    });
    if (response.status !== 201) await raiseFor(response);
  }

  async submitRating(
    taskId: string,
    leaseId: string,
    rating: number,
  ): Promise<void> {
    const response = await this.post(`/tasks/${taskId}/rating`, {
      lease_id: leaseId,
      rating,
    });
    if (response.status !== 201) await raiseFor(response);
  }

  async stats(campaignId: string): Promise<Record<string, unknown>> {
    const response = await fetch(`${this.baseUrl}/campaigns/${campaignId}/stats`);
    if (!response.ok) await raiseFor(response);
    return response.json();
  }

  async exportCampaign(
    campaignId: string,
    format: "captions" | "ratings",
  ): Promise<ExportResult> {
    const response = await fetch(
      `${this.baseUrl}/campaigns/${campaignId}/export?format=${format}`,
    );
    if (!response.ok) await raiseFor(response);
    return {
      body: await response.text(),
      complete: response.headers.get("X-Complete") ?? "",
    };
  }
}
