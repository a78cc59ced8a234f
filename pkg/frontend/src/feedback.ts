// Staged feedback: the fixed reveal order is correctness first, then the
// language-description pieces (set notation / Parikh difference), then the
// counterexamples. Stage visibility is purely a client concern; a panel only
// exists when the server sent the corresponding piece.

import type { AttemptResponse } from "./api.js";

export interface FeedbackStage {
  id: "correctness" | "description" | "counterexample";
  title: string;
  lines: string[];
}

const VERDICT_TEXT: Record<AttemptResponse["verdict"], string> = {
  equivalent: "Your grammar is correct.",
  not_equivalent: "Your grammar is not correct.",
  undecided: "The checker could not decide; an instructor will review this attempt.",
};

export function buildStages(response: AttemptResponse): FeedbackStage[] {
  const stages: FeedbackStage[] = [
    {
      id: "correctness",
      title: "Correctness",
      lines: [VERDICT_TEXT[response.verdict]],
    },
  ];
  const explanation = response.explanation ?? {};
  const description: string[] = [];
  if (explanation.attempt_set_notation) {
    description.push(`Your grammar describes the language ${explanation.attempt_set_notation.rendered}.`);
  }
  if (explanation.target_set_notation) {
    description.push(`The assignment asks for ${explanation.target_set_notation.rendered}.`);
  }
  if (explanation.parikh_difference?.concise) {
    description.push(
      `The letter counts of the two languages differ where ${explanation.parikh_difference.formula}.`,
    );
  }
  if (explanation.bug_fix) {
    description.push(
      `A small repair (${explanation.bug_fix.transformation}) would make it correct:\n${explanation.bug_fix.grammar}`,
    );
  }
  if (description.length > 0) {
    stages.push({ id: "description", title: "Pinpointing the mistake", lines: description });
  }
  const counterexamples: string[] = [];
  if (explanation.counterexample) {
    const { word, side } = explanation.counterexample;
    const shown = word === "" ? "the empty word" : `the word ${word}`;
    counterexamples.push(
      side === "only_in_left"
        ? `The language described by your grammar contains ${shown}, which is not in the assignment's language.`
        : `The assignment's language contains ${shown}, which your grammar cannot produce.`,
    );
  }
  if (explanation.structural_counterexample) {
    const { word, witness } = explanation.structural_counterexample;
    const shape = witness.map((w) => `${w}*`).join("");
    counterexamples.push(
      `Your grammar produces ${word === "" ? "the empty word" : word}, which is not even of the shape ${shape}.`,
    );
  }
  if (counterexamples.length > 0) {
    stages.push({ id: "counterexample", title: "A counterexample", lines: counterexamples });
  }
  return stages;
}

export interface RevealState {
  stages: FeedbackStage[];
  revealed: number; // number of visible stages, at least 1 once feedback exists
}

export function initialReveal(response: AttemptResponse): RevealState {
  return { stages: buildStages(response), revealed: 1 };
}

export function revealNext(state: RevealState): RevealState {
  return { ...state, revealed: Math.min(state.revealed + 1, state.stages.length) };
}

export function hasMore(state: RevealState): boolean {
  return state.revealed < state.stages.length;
}

export function visibleStages(state: RevealState): FeedbackStage[] {
  return state.stages.slice(0, state.revealed);
}
