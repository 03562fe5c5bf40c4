/** Session driver: lease, render the right screen, submit, lease again.
 *
 * All state of record lives in the service journal; the only thing kept
 * client-side is the worker id (so a returning worker keeps their identity
 * across devices is the service's problem, not ours).
 */

import { ApiError, CampaignApi, TaskPayload } from "./api.js";
import { Screen, renderCaptionScreen } from "./caption.js";
import { renderRatingScreen } from "./rating.js";
import { clear, el } from "./dom.js";

export interface SessionOptions {
  campaignId: string;
  workerId: string;
  attributes?: Record<string, string>;
  now?: () => number;
}

export class Session {
  private screen: Screen | null = null;

  constructor(
    private root: Element,
    private api: CampaignApi,
    private options: SessionOptions,
  ) {}

  async start(): Promise<void> {
    await this.leaseNext();
  }

  stop(): void {
    this.screen?.dispose();
    this.screen = null;
  }

  private idle(text: string, retry: boolean): void {
    const doc = this.root.ownerDocument;
    clear(this.root);
    const message = el(doc, "p", { class: "message", role: "status" }, [text]);
    this.root.append(message);
    if (retry) {
      const button = el(doc, "button", { class: "next" }, ["Check again"]);
      button.addEventListener("click", () => void this.leaseNext());
      this.root.append(button);
    }
  }

  async leaseNext(): Promise<void> {
    this.stop();
    let payload: TaskPayload | null;
    try {
      payload = await this.api.lease(
        this.options.campaignId,
        this.options.workerId,
        this.options.attributes ?? {},
      );
    } catch (error) {
      if (error instanceof ApiError && error.status === 403) {
        this.idle("You are not eligible for this campaign.", false);
      } else if (error instanceof ApiError && error.status === 409) {
        this.idle("This campaign is closed.", false);
      } else if (error instanceof ApiError && error.status === 404) {
        this.idle(`No such campaign: ${this.options.campaignId}`, false);
      } else {
        this.idle("Could not reach the campaign service.", true);
      }
      return;
    }
    if (payload === null) {
      this.idle("No tasks available right now.", true);
      return;
    }
    this.render(payload);
  }

  private render(payload: TaskPayload): void {
    const now = this.options.now ?? Date.now;
    if (payload.kind === "caption") {
      this.screen = renderCaptionScreen(this.root, payload, {
        submit: async (text) => {
          await this.api.submitCaption(payload.task_id, payload.lease_id, text);
          await this.leaseNext();
        },
        next: () => void this.leaseNext(),
      }, now);
    } else {
      this.screen = renderRatingScreen(this.root, payload, {
        submit: async (rating) => {
          await this.api.submitRating(payload.task_id, payload.lease_id, rating);
          await this.leaseNext();
        },
        next: () => void this.leaseNext(),
      }, now);
    }
  }
}

const WORKER_KEY = "imgpivot.worker";

/** Entry form, then a running session against the serving origin. */
export function bootstrap(doc: Document): void {
  const root = doc.getElementById("app");
  if (!root) return;
  clear(root);

  const campaign = el(doc, "input", {
    type: "text",
    id: "campaign-id",
    placeholder: "campaign id",
  });
  const worker = el(doc, "input", {
    type: "text",
    id: "worker-id",
    placeholder: "worker id",
  });
  try {
    worker.value = doc.defaultView?.localStorage.getItem(WORKER_KEY) ?? "";
  } catch {
    // storage blocked: run without the remembered id
  }
  const start = el(doc, "button", { class: "submit" }, ["Start"]);
  const message = el(doc, "p", { class: "message", role: "status" });

  start.addEventListener("click", () => {
    const campaignId = campaign.value.trim();
    const workerId = worker.value.trim();
    if (!campaignId || !workerId) {
      message.textContent = "Both a campaign id and a worker id are needed.";
      return;
    }
    try {
      doc.defaultView?.localStorage.setItem(WORKER_KEY, workerId);
    } catch {
      // best effort only
    }
    const session = new Session(root, new CampaignApi(""), {
      campaignId,
      workerId,
    });
    void session.start();
  });

  root.append(
    el(doc, "div", { class: "entry-form" }, [campaign, worker, start]),
    message,
  );
}
