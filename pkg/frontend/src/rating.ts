/** Pair-rating screen: two sentences side by side, one rating 5..1.
 *
 * Options come from the payload's criteria rows in server order (best
 * first); number keys 1-5 select the matching rating.  Exactly one
 * selection is required before submit enables.
 */

import { ApiError, TaskPayload } from "./api.js";
import { Countdown, formatRemaining } from "./countdown.js";
import { clear, el } from "./dom.js";
import { Screen } from "./caption.js";

export interface RatingHandlers {
  submit(rating: number): Promise<void>;
  next(): void;
}

export function renderRatingScreen(
  root: Element,
  payload: TaskPayload,
  handlers: RatingHandlers,
  now: () => number = Date.now,
): Screen {
  const doc = root.ownerDocument;
  clear(root);

  const pair = payload.pair;
  // dir=auto so Devanagari and RTL scripts shape correctly
  const pairBlock = el(doc, "div", { class: "pair" }, [
    el(doc, "p", { class: "pair-src", dir: "auto" }, [pair?.src_text ?? ""]),
    el(doc, "p", { class: "pair-tgt", dir: "auto" }, [pair?.tgt_text ?? ""]),
  ]);

  let selected: number | null = null;
  const submit = el(doc, "button", { class: "submit", disabled: "" }, [
    "Submit rating",
  ]);
  const message = el(doc, "p", { class: "message", role: "status" });
  const timer = el(doc, "span", { class: "countdown" });

  const options = el(doc, "div", { class: "criteria", role: "radiogroup" });
  const buttons = new Map<number, HTMLButtonElement>();
  for (const row of payload.criteria ?? []) {
    const option = el(doc, "button", {
      class: "criterion",
      role: "radio",
      "aria-checked": "false",
      "data-rating": String(row.rating),
    }, [
      el(doc, "span", { class: "criterion-label" }, [
        `${row.rating} ${row.label}`,
      ]),
      el(doc, "span", { class: "criterion-text" }, [row.criteria]),
    ]);
    option.addEventListener("click", () => select(row.rating));
    buttons.set(row.rating, option);
    options.append(option);
  }

  const select = (rating: number) => {
    if (!buttons.has(rating)) return;
    selected = rating;
    for (const [value, button] of buttons) {
      button.setAttribute("aria-checked", value === rating ? "true" : "false");
      button.classList.toggle("selected", value === rating);
    }
    submit.disabled = false;
  };

  const onKey = (event: KeyboardEvent) => {
    if (event.key >= "1" && event.key <= "5") select(Number(event.key));
  };
  doc.addEventListener("keydown", onKey);

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
    if (selected === null) return; // unreachable while disabled
    submit.disabled = true;
    message.textContent = "";
    try {
      await handlers.submit(selected);
    } catch (error) {
      if (error instanceof ApiError && error.status === 410) {
        message.textContent = "Your lease on this pair expired.";
        offerNext("Get a new pair");
      } else if (error instanceof ApiError && error.status === 409) {
        message.textContent =
          "This pair already has enough ratings or the campaign closed.";
        offerNext("Get a new pair");
      } else if (error instanceof ApiError) {
        message.textContent = `Rejected: ${error.detail || error.error}`;
        submit.disabled = false;
      } else {
        message.textContent = "Network problem; your rating was not saved.";
        submit.disabled = false;
      }
    }
  });

  const progress = payload.progress;
  root.append(
    el(doc, "header", { class: "task-header" }, [
      el(doc, "span", { class: "progress" }, [
        `${progress.collected} / ${progress.expected} ratings collected`,
      ]),
      timer,
    ]),
    pairBlock,
    options,
    el(doc, "div", { class: "rating-form" }, [submit]),
    message,
  );

  return {
    dispose() {
      countdown.stop();
      doc.removeEventListener("keydown", onKey);
    },
  };
}
