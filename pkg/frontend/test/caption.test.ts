// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import { ApiError, TaskPayload } from "../src/api.js";
import { CAPTION_LIMIT, renderCaptionScreen } from "../src/caption.js";

const GUIDELINES = [
  "आपको एक वाक्य के साथ हर छवि का वर्णन करना होगा।",
  "संक्षिप्त होने का प्रयास करें।",
  "व्याकरण और वर्तनी पर ध्यान दें।",
];

function payload(overrides: Partial<TaskPayload> = {}): TaskPayload {
  const now = Date.now() / 1000;
  return {
    campaign_id: "c1",
    kind: "caption",
    task_id: "c1/img/x1.jpg",
    lease_id: "L1",
    issued_at: now,
    expires_at: now + 900,
    quota: 5,
    progress: { collected: 3, expected: 10 },
    language: "hi",
    guidelines: GUIDELINES,
    image: { id: "x1.jpg", uri: null },
    ...overrides,
  };
}

function mount(over: Partial<TaskPayload> = {}, handlers = {}) {
  const root = document.createElement("div");
  document.body.append(root);
  const merged = {
    submit: vi.fn().mockResolvedValue(undefined),
    next: vi.fn(),
    ...handlers,
  };
  const screen = renderCaptionScreen(root, payload(over), merged);
  return { root, screen, handlers: merged };
}

const flush = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("caption screen", () => {
  it("renders every guideline line verbatim, in order", () => {
    const { root, screen } = mount();
    const items = [...root.querySelectorAll(".guidelines li")].map(
      (li) => li.textContent,
    );
    expect(items).toEqual(GUIDELINES);
    screen.dispose();
  });

  it("shows the image id and progress counters", () => {
    const { root, screen } = mount();
    expect(root.querySelector("figcaption")?.textContent).toBe("x1.jpg");
    expect(root.querySelector(".progress")?.textContent).toBe(
      "3 / 10 captions collected",
    );
    screen.dispose();
  });

  it("disables submit until the trimmed input is non-empty", () => {
    const { root, screen } = mount();
    const input = root.querySelector("input")!;
    const submit = root.querySelector<HTMLButtonElement>("button.submit")!;
    expect(submit.disabled).toBe(true);
    input.value = "   ";
    input.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(true);
    input.value = "एक कुत्ता";
    input.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(false);
    screen.dispose();
  });

  it("updates the character count live and caps the field", () => {
    const { root, screen } = mount();
    const input = root.querySelector("input")!;
    expect(input.getAttribute("maxlength")).toBe(String(CAPTION_LIMIT));
    input.value = "पाँच";
    input.dispatchEvent(new Event("input"));
    expect(root.querySelector(".char-count")?.textContent).toBe(
      `4 / ${CAPTION_LIMIT}`,
    );
    screen.dispose();
  });

  it("passes the exact text to the submit handler", async () => {
    const { root, screen, handlers } = mount();
    const input = root.querySelector("input")!;
    input.value = "एक आदमी पहाड़ पर चढ़ रहा है |";
    input.dispatchEvent(new Event("input"));
    root.querySelector<HTMLButtonElement>("button.submit")!.click();
    await flush();
    expect(handlers.submit).toHaveBeenCalledWith("एक आदमी पहाड़ पर चढ़ रहा है |");
    screen.dispose();
  });

  it("prompts for a re-lease when the service answers 410", async () => {
    const { root, screen, handlers } = mount(
      {},
      {
        submit: vi
          .fn()
          .mockRejectedValue(new ApiError(410, { error: "LeaseExpired", detail: "L1" })),
      },
    );
    const input = root.querySelector("input")!;
    input.value = "कुछ";
    input.dispatchEvent(new Event("input"));
    root.querySelector<HTMLButtonElement>("button.submit")!.click();
    await flush();
    expect(root.querySelector(".message")?.textContent).toContain("expired");
    root.querySelector<HTMLButtonElement>("button.next")!.click();
    expect(handlers.next).toHaveBeenCalledTimes(1);
    screen.dispose();
  });

  it("surfaces other rejections and lets the worker edit", async () => {
    const { root, screen } = mount(
      {},
      {
        submit: vi.fn().mockRejectedValue(
          new ApiError(400, {
            error: "InvalidSubmission",
            detail: "caption must be a single line",
          }),
        ),
      },
    );
    const input = root.querySelector("input")!;
    input.value = "कुछ";
    input.dispatchEvent(new Event("input"));
    const submit = root.querySelector<HTMLButtonElement>("button.submit")!;
    submit.click();
    await flush();
    expect(root.querySelector(".message")?.textContent).toContain(
      "caption must be a single line",
    );
    expect(submit.disabled).toBe(false);
    screen.dispose();
  });

  it("marks the countdown as a warning inside the last 20% of the ttl", () => {
    const nowSec = 2_000_000;
    const root = document.createElement("div");
    // 100 of 900 seconds left
    const screen = renderCaptionScreen(
      root,
      payload({ issued_at: nowSec - 800, expires_at: nowSec + 100 }),
      { submit: vi.fn(), next: vi.fn() },
      () => nowSec * 1000,
    );
    const timer = root.querySelector(".countdown")!;
    expect(timer.classList.contains("warn")).toBe(true);
    expect(timer.textContent).toBe("lease expires in 1:40");
    screen.dispose();
  });
});
