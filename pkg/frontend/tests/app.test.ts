import { beforeEach, describe, expect, it } from 'vitest';

import { ApiError, NelsApi } from '../src/api';
import { App, AppElements } from '../src/app';
import { SearchResponse, SearchResult } from '../src/types';

function result(segmentId: string, votes = 0): SearchResult {
  return {
    segment_id: segmentId,
    media_url: `local://${segmentId.split('#')[0]}`,
    offset_s: 0,
    predicted_class: 'dog',
    confidence: 0.9,
    title: `clip ${segmentId}`,
    thumbnail_url: null,
    correct_votes: votes,
    incorrect_votes: 0,
  };
}

function searchResponse(results: SearchResult[], status = 'ok'): SearchResponse {
  return { query: 'dog', matched_class: 'dog', similarity: 1.0, status, results };
}

class FakeApi {
  searchCalls = 0;
  voteCalls: Array<{ segmentId: string; verdict: string }> = [];
  searchResult: SearchResponse = searchResponse([]);
  voteError: ApiError | null = null;
  voteGate: Promise<void> = Promise.resolve();

  async search(): Promise<SearchResponse> {
    this.searchCalls += 1;
    return this.searchResult;
  }

  async vote(segmentId: string, _cls: string, verdict: string) {
    this.voteCalls.push({ segmentId, verdict });
    await this.voteGate;
    if (this.voteError) throw this.voteError;
    return { segment_id: segmentId, correct_votes: 1, incorrect_votes: 0 };
  }

  async classify() {
    return { url: 'local://x', dominant_class: 'dog', segments: [] };
  }

  async stats() {
    return { segment_count: 0, hours_indexed: 0, per_class_counts: {}, feedback_count: 0 };
  }
}

function mount(): { app: App; api: FakeApi; elements: AppElements } {
  document.body.innerHTML =
    '<div id="results"></div><div id="classify-panel"></div><div id="stats-panel"></div>';
  const elements = {
    results: document.getElementById('results')!,
    classify: document.getElementById('classify-panel')!,
    stats: document.getElementById('stats-panel')!,
  };
  const api = new FakeApi();
  const app = new App(elements, api as unknown as NelsApi);
  return { app, api, elements };
}

function clickVerdict(elements: AppElements, segmentId: string, verdict: string) {
  const button = elements.results.querySelector(
    `[data-segment-id="${segmentId}"] button[data-verdict="${verdict}"]`,
  ) as HTMLButtonElement;
  button.click();
}

describe('App', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('empty search term is rejected client-side without a request', async () => {
    const { app, api, elements } = mount();
    await app.runSearch('   ');
    expect(api.searchCalls).toBe(0);
    expect(elements.results.innerHTML).toContain('enter a search term');
  });

  it('renders cards in server order', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('b#0'), result('a#0')]);
    await app.runSearch('dog');
    const ids = [...elements.results.querySelectorAll('[data-segment-id]')].map((el) =>
      el.getAttribute('data-segment-id'),
    );
    expect(ids).toEqual(['b#0', 'a#0']);
  });

  it('shows the no-results status verbatim', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([], 'no class above threshold');
    await app.runSearch('zzz');
    expect(elements.results.textContent).toContain('no class above threshold');
  });

  it('network failure shows a retriable banner and no grid', async () => {
    const { app, api, elements } = mount();
    api.search = async () => {
      throw new TypeError('network down');
    };
    await app.runSearch('dog');
    expect(elements.results.querySelector('[data-role="error"]')).not.toBeNull();
    expect(elements.results.querySelector('.result-card')).toBeNull();
  });

  it('a vote disables the buttons in flight and applies server tallies', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('a#0')]);
    await app.runSearch('dog');

    let release!: () => void;
    api.voteGate = new Promise((resolve) => (release = resolve));
    clickVerdict(elements, 'a#0', 'correct');
    await Promise.resolve(); // let the handler render the in-flight state
    expect(elements.results.querySelector('button[data-verdict="correct"]')!.hasAttribute('disabled')).toBe(true);

    release();
    await app.lastAction;
    expect(elements.results.textContent).toContain('1 correct / 0 incorrect');
    expect(elements.results.querySelector('button[data-verdict="correct"]')!.hasAttribute('disabled')).toBe(false);
  });

  it('clicks while in flight are ignored (one request per card)', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('a#0')]);
    await app.runSearch('dog');

    let release!: () => void;
    api.voteGate = new Promise((resolve) => (release = resolve));
    clickVerdict(elements, 'a#0', 'correct');
    const first = app.lastAction;
    await Promise.resolve();
    clickVerdict(elements, 'a#0', 'correct');
    release();
    await first;
    await app.lastAction;
    expect(api.voteCalls).toHaveLength(1);
  });

  it('sequential votes each hit the server', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('a#0')]);
    await app.runSearch('dog');
    clickVerdict(elements, 'a#0', 'correct');
    await app.lastAction;
    clickVerdict(elements, 'a#0', 'correct');
    await app.lastAction;
    expect(api.voteCalls).toHaveLength(2);
  });

  it('a 404 marks the card stale and reverts tallies', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('a#0', 3)]);
    await app.runSearch('dog');
    api.voteError = new ApiError(404, { error: 'unknown-segment' });
    clickVerdict(elements, 'a#0', 'correct');
    await app.lastAction;
    expect(elements.results.querySelector('.is-stale')).not.toBeNull();
    expect(elements.results.textContent).toContain('3 correct');
  });

  it('other vote failures revert and show a banner', async () => {
    const { app, api, elements } = mount();
    api.searchResult = searchResponse([result('a#0', 3)]);
    await app.runSearch('dog');
    api.voteError = new ApiError(500, null);
    clickVerdict(elements, 'a#0', 'correct');
    await app.lastAction;
    expect(elements.results.textContent).toContain('3 correct');
    expect(elements.results.querySelector('[data-role="error"]')).not.toBeNull();
    expect(elements.results.querySelector('.is-stale')).toBeNull();
  });

  it('malformed classify input is validated client-side', async () => {
    const { app, api, elements } = mount();
    let called = false;
    api.classify = async () => {
      called = true;
      return { url: '', dominant_class: '', segments: [] };
    };
    await app.runClassify('not a url');
    expect(called).toBe(false);
    expect(elements.classify.textContent).toContain('paste a single media URL');
  });

  it('rejected-duration classifications are explained', async () => {
    const { app, api, elements } = mount();
    api.classify = async () => {
      throw new ApiError(422, { error: 'rejected-duration', duration_s: 1.0 });
    };
    await app.runClassify('local://shorty');
    expect(elements.classify.textContent).toContain('outside the admitted');
  });

  it('classify renders the dominant panel', async () => {
    const { app, elements } = mount();
    await app.runClassify('local://dog1');
    expect(elements.classify.querySelector('[data-role="dominant"]')!.textContent).toBe('dog');
  });
});
