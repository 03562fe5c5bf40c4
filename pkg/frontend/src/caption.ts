/** Caption-writing screen.
 *
 * Renders only what the lease payload carries: the image, the campaign's
 * guideline block verbatim, progress, and the lease countdown.  The input
 * checks here (non-empty, length display) are conveniences; the service
 * re-validates every submission.
 */

import { ApiError, TaskPayload } from "./api.js";
import { Countdown, formatRemaining } from "./countdown.js";
import { clear, el } from "./dom.js";

// display limit only; the server rejects oversized captions regardless
export const CAPTION_LIMIT = 500;

export interface CaptionHandlers {
  /** POST the caption; rejects with ApiError on a service refusal. */
  submit(text: string): Promise<void>;
  /** Ask the session for the next task (also the re-lease path after 410). */
  next(): void;
}

export interface Screen {
  dispose(): void;
}

export function renderCaptionScreen(
  root: Element,
  payload: TaskPayload,
  handlers: CaptionHandlers,
  now: () => number = Date.now,
): Screen {
  const doc = root.ownerDocument;
  clear(root);

  const image = payload.image ?? { id: "?", uri: null };
  const figure = el(doc, "figure", { class: "task-image" });
  if (image.uri) {
    figure.append(el(doc, "img", { src: image.uri, alt: image.id }));
  }
  figure.append(el(doc, "figcaption", {}, [image.id]));

  const guidelines = el(
    doc,
    "ol",
    { class: "guidelines" },
    (payload.guidelines ?? []).map((line) => el(doc, "li", {}, [line])),
  );

  const input = el(doc, "input", {
    type: "text",
    class: "caption-input",
    maxlength: String(CAPTION_LIMIT),
    dir: "auto",
    placeholder: "Describe the image in one sentence",
  });
  const counter = el(doc, "span", { class: "char-count" }, [
    `0 / ${CAPTION_LIMIT}`,
  ]);
  const submit = el(doc, "button", { class: "submit", disabled: "" }, [
    "Submit caption",
  ]);
  const message = el(doc, "p", { class: "message", role: "status" });
  const timer = el(doc, "span", { class: "countdown" });

  const refresh = () => {
    counter.textContent = `${input.value.length} / ${CAPTION_LIMIT}`;
    submit.disabled = input.value.trim() === "";
  };
  input.addEventListener("input", refresh);

  const countdown = new Countdown(payload.issued_at, payload.expires_at, now);
  countdown.start((state) => {
    timer.textContent = state.expired
      ? "lease expired"
      : `lease expires in ${formatRemaining(state.remainingMs)}`;
    timer.classList.toggle("warn", state.warn);
  });

  const offerNext = (label: string) => {
    const button = el(doc, "button", { class: "next" }, [label]);
    button.addEventListener("click", () => handlers.next());
    message.append(" ", button);
  };

  submit.addEventListener("click", async () => {
    submit.disabled = true;
    message.textContent = "";
    try {
      await handlers.submit(input.value);
    } catch (error) {
      if (error instanceof ApiError && error.status === 410) {
        message.textContent = "Your lease on this task expired.";
        offerNext("Get a new task");
      } else if (error instanceof ApiError && error.status === 409) {
        message.textContent =
          "This image already has enough captions or the campaign closed.";
        offerNext("Get a new task");
      } else if (error instanceof ApiError) {
        message.textContent = `Rejected: ${error.detail || error.error}`;
        refresh(); // let the worker edit and retry
      } else {
        message.textContent = "Network problem; your caption was not saved.";
        refresh();
      }
    }
  });

  const progress = payload.progress;
  root.append(
    el(doc, "header", { class: "task-header" }, [
      el(doc, "span", { class: "progress" }, [
        `${progress.collected} / ${progress.expected} captions collected`,
      ]),
      timer,
    ]),
    figure,
    guidelines,
    el(doc, "div", { class: "caption-form" }, [input, counter, submit]),
    message,
  );

  return {
    dispose() {
      countdown.stop();
    },
  };
}
