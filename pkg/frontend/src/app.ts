// Two-route single-page app: #/student/<exercise> and #/instructor/<exercise>.
// All DOM work lives here; the flow logic (api.ts, feedback.ts, instructor.ts)
// is framework-free and unit-tested.

import { ApiError, CfgeqClient } from "./api.js";
import { hasMore, initialReveal, revealNext, RevealState, visibleStages } from "./feedback.js";
import { classifyAndRefresh, ClusterCard, loadReview } from "./instructor.js";

const client = new CfgeqClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function route(): { page: "student" | "instructor"; exercise: string } {
  const parts = location.hash.replace(/^#\/?/, "").split("/");
  const page = parts[0] === "instructor" ? "instructor" : "student";
  return { page, exercise: decodeURIComponent(parts[1] ?? "intro") };
}

// ------------------------------------------------------------------ student

function renderFeedback(container: HTMLElement, state: RevealState) {
  container.replaceChildren();
  for (const stage of visibleStages(state)) {
    const panel = el("section", { class: `panel panel-${stage.id}` }, el("h3", {}, stage.title));
    for (const line of stage.lines) {
      panel.append(el("p", {}, line));
    }
    container.append(panel);
  }
  if (hasMore(state)) {
    const button = el("button", { class: "reveal" }, "Show me more");
    button.addEventListener("click", () => renderFeedback(container, revealNext(state)));
    container.append(button);
  }
}

async function studentPage(root: HTMLElement, exerciseId: string) {
  const exercise = await client.getExercise(exerciseId);
  const input = el("textarea", { rows: "6", cols: "60", placeholder: "S -> a S b | a b" });
  const errorBox = el("p", { class: "error" });
  const badge = el("span", { class: "badge" });
  const feedback = el("div", { class: "feedback" });
  const submit = el("button", {}, "Submit attempt");
  submit.addEventListener("click", async () => {
    errorBox.textContent = "";
    badge.textContent = "";
    feedback.replaceChildren();
    try {
      const response = await client.submitAttempt(exerciseId, input.value);
      badge.textContent = `${response.verdict} (via ${response.method})`;
      badge.className = `badge badge-${response.verdict}`;
      renderFeedback(feedback, initialReveal(response));
    } catch (error) {
      // parse errors come back as 422 with line/column in the detail
      errorBox.textContent = error instanceof ApiError ? error.message : String(error);
    }
  });
  root.replaceChildren(
    el("h1", {}, `Exercise ${exercise.id}`),
    el("p", {}, exercise.description || "Construct a context-free grammar for the assignment."),
    input,
    el("div", {}, submit, " ", badge),
    errorBox,
    feedback,
  );
}

// --------------------------------------------------------------- instructor

function renderCards(
  root: HTMLElement,
  list: HTMLElement,
  exerciseId: string,
  cards: ClusterCard[],
) {
  list.replaceChildren();
  if (cards.length === 0) {
    list.append(el("p", {}, "No unrecognized clusters. Nothing to review."));
    return;
  }
  for (const card of cards) {
    const rationale = el("textarea", { rows: "2", cols: "40", placeholder: "rationale (required)" });
    const status = el("span", { class: "status" });
    const actions = el("div", {});
    for (const verdict of ["equivalent", "not_equivalent"] as const) {
      const button = el("button", {}, `Mark ${verdict.replace("_", " ")}`);
      button.addEventListener("click", async () => {
        status.textContent = "…";
        try {
          const refreshed = await classifyAndRefresh(
            client,
            exerciseId,
            card.id,
            verdict,
            rationale.value,
          );
          renderCards(root, list, exerciseId, refreshed);
        } catch (error) {
          status.textContent = error instanceof ApiError ? error.message : String(error);
        }
      });
      actions.append(button, " ");
    }
    list.append(
      el(
        "article",
        { class: "cluster" },
        el("pre", {}, card.representative),
        el("p", {}, `${card.memberCount} distinct attempt(s) in this cluster`),
        rationale,
        actions,
        status,
      ),
    );
  }
}

async function instructorPage(root: HTMLElement, exerciseId: string) {
  const list = el("div", { class: "clusters" });
  root.replaceChildren(el("h1", {}, `Review: ${exerciseId}`), list);
  renderCards(root, list, exerciseId, await loadReview(client, exerciseId));
}

// ------------------------------------------------------------------- router

async function render() {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const { page, exercise } = route();
  try {
    if (page === "instructor") {
      await instructorPage(root, exercise);
    } else {
      await studentPage(root, exercise);
    }
  } catch (error) {
    root.replaceChildren(
      el("p", { class: "error" }, error instanceof ApiError ? error.message : String(error)),
    );
  }
}

window.addEventListener("hashchange", render);
window.addEventListener("DOMContentLoaded", render);
