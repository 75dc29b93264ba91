// Controller: wires the grid, link analysis and stats views to the API.
// All tally changes go through the server; the DOM is re-rendered from
// state after every transition.

import { ApiError, NelsApi } from './api.js';
import {
  applyVoteFailure,
  applyVoteSuccess,
  beginVote,
  CardState,
  cardsFromResults,
  findCard,
} from './state.js';
import {
  renderClassify,
  renderClassifyRejection,
  renderErrorBanner,
  renderResults,
  renderStats,
  renderValidation,
} from './render.js';
import { Verdict } from './types.js';

export interface AppElements {
  results: HTMLElement;
  classify: HTMLElement;
  stats: HTMLElement;
}

export class App {
  cards: CardState[] = [];
  status = 'ok';
  /** Resolves when the most recent user action has settled (for tests). */
  lastAction: Promise<void> = Promise.resolve();

  constructor(
    private readonly elements: AppElements,
    private readonly api: NelsApi,
  ) {
    this.elements.results.addEventListener('click', (event) => {
      const target = event.target as HTMLElement | null;
      const button = target?.closest?.('button[data-verdict]') as HTMLElement | null;
      if (!button) return;
      const card = button.closest('[data-segment-id]') as HTMLElement | null;
      if (!card) return;
      const segmentId = card.getAttribute('data-segment-id')!;
      const verdict = button.getAttribute('data-verdict') as Verdict;
      this.lastAction = this.handleVote(segmentId, verdict);
    });
  }

  renderGrid(): void {
    this.elements.results.innerHTML = renderResults(this.status, this.cards);
  }

  async runSearch(term: string): Promise<void> {
    if (!term.trim()) {
      this.elements.results.innerHTML = renderValidation('enter a search term first');
      return;
    }
    try {
      const response = await this.api.search(term);
      this.status = response.status;
      this.cards = cardsFromResults(response.results);
      this.renderGrid();
    } catch {
      // no partial grid on failure, just the banner
      this.cards = [];
      this.elements.results.innerHTML = renderErrorBanner('search failed');
    }
  }

  async handleVote(segmentId: string, verdict: Verdict): Promise<void> {
    const begun = beginVote(this.cards, segmentId);
    if (begun === null) return; // already in flight, stale, or unknown
    this.cards = begun;
    this.renderGrid();
    const card = findCard(this.cards, segmentId)!;
    try {
      const tallies = await this.api.vote(segmentId, card.result.predicted_class, verdict);
      this.cards = applyVoteSuccess(this.cards, tallies);
      this.renderGrid();
    } catch (error) {
      const gone = error instanceof ApiError && error.status === 404;
      this.cards = applyVoteFailure(this.cards, segmentId, { stale: gone });
      this.renderGrid();
      if (!gone) {
        this.elements.results.insertAdjacentHTML(
          'afterbegin',
          renderErrorBanner('vote not recorded'),
        );
      }
    }
  }

  async runClassify(url: string): Promise<void> {
    const trimmed = url.trim();
    if (!trimmed || /\s/.test(trimmed)) {
      this.elements.classify.innerHTML = renderValidation('paste a single media URL');
      return;
    }
    try {
      const response = await this.api.classify(trimmed);
      this.elements.classify.innerHTML = renderClassify(response);
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        const body = error.body as { duration_s?: number } | null;
        const detail = body?.duration_s !== undefined ? `${body.duration_s.toFixed(1)} s` : 'n/a';
        this.elements.classify.innerHTML = renderClassifyRejection('rejected-duration', detail);
      } else if (error instanceof ApiError) {
        this.elements.classify.innerHTML = renderClassifyRejection('upstream-error', `status ${error.status}`);
      } else {
        this.elements.classify.innerHTML = renderErrorBanner('link analysis failed');
      }
    }
  }

  async refreshStats(): Promise<void> {
    try {
      this.elements.stats.innerHTML = renderStats(await this.api.stats());
    } catch {
      this.elements.stats.innerHTML = renderErrorBanner('stats unavailable');
    }
  }
}
