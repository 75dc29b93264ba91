// Result-grid state: a pure function of the last server responses plus
// per-card in-flight flags. Tallies only ever change on a server ack.

import { FeedbackResponse, SearchResult } from './types.js';

export interface CardState {
  result: SearchResult;
  inFlight: boolean;
  stale: boolean;
}

export function cardsFromResults(results: SearchResult[]): CardState[] {
  return results.map((result) => ({ result, inFlight: false, stale: false }));
}

export function findCard(cards: CardState[], segmentId: string): CardState | undefined {
  return cards.find((c) => c.result.segment_id === segmentId);
}

/** Mark a card's vote as in flight; null when the click must be ignored
 *  (unknown card, already in flight, or stale). */
export function beginVote(cards: CardState[], segmentId: string): CardState[] | null {
  const card = findCard(cards, segmentId);
  if (!card || card.inFlight || card.stale) return null;
  return cards.map((c) =>
    c.result.segment_id === segmentId ? { ...c, inFlight: true } : c,
  );
}

export function applyVoteSuccess(cards: CardState[], tallies: FeedbackResponse): CardState[] {
  return cards.map((c) =>
    c.result.segment_id === tallies.segment_id
      ? {
          ...c,
          inFlight: false,
          result: {
            ...c.result,
            correct_votes: tallies.correct_votes,
            incorrect_votes: tallies.incorrect_votes,
          },
        }
      : c,
  );
}

/** Revert an in-flight vote; a gone segment (404) marks the card stale. */
export function applyVoteFailure(
  cards: CardState[],
  segmentId: string,
  options: { stale: boolean },
): CardState[] {
  return cards.map((c) =>
    c.result.segment_id === segmentId
      ? { ...c, inFlight: false, stale: options.stale }
      : c,
  );
}
