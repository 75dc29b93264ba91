// UI end-to-end against a real seeded backend: the App drives the same
// HTTP endpoints the production site uses.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ChildProcess, spawn } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, dirname } from 'node:path';
import { fileURLToPath } from 'node:url';

import { NelsApi } from '../src/api';
import { App, AppElements } from '../src/app';

const PORT = 8930 + Math.floor(Math.random() * 50);
const BASE = `http://127.0.0.1:${PORT}`;

let backend: ChildProcess;
let workdir: string;

async function waitForBackend(timeoutMs = 90_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/stats`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error('backend did not come up in time');
}

function mount(): { app: App; elements: AppElements } {
  document.body.innerHTML =
    '<div id="results"></div><div id="classify-panel"></div><div id="stats-panel"></div>';
  const elements = {
    results: document.getElementById('results')!,
    classify: document.getElementById('classify-panel')!,
    stats: document.getElementById('stats-panel')!,
  };
  const app = new App(elements, new NelsApi(BASE));
  return { app, elements };
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), 'nels-e2e-'));
  const script = join(dirname(fileURLToPath(import.meta.url)), 'seed_backend.py');
  backend = spawn('python3', [script, '--port', String(PORT), '--dir', workdir], {
    stdio: ['ignore', 'inherit', 'inherit'],
  });
  await waitForBackend();
});

afterAll(() => {
  backend?.kill('SIGTERM');
  rmSync(workdir, { recursive: true, force: true });
});

describe('search and feedback against the seeded backend', () => {
  it('search renders at least one card', async () => {
    const { app, elements } = mount();
    await app.runSearch('tone440');
    const cards = elements.results.querySelectorAll('.result-card');
    expect(cards.length).toBeGreaterThanOrEqual(1);
    expect(elements.results.textContent).toContain('tone440');
  });

  it('clicking Correct increments the rendered and backend tallies by one', async () => {
    const { app, elements } = mount();
    await app.runSearch('tone1000');
    const card = elements.results.querySelector('.result-card')!;
    const segmentId = card.getAttribute('data-segment-id')!;
    const before = await (await fetch(`${BASE}/search?q=tone1000`)).json();
    const beforeVotes = before.results.find(
      (r: { segment_id: string }) => r.segment_id === segmentId,
    ).correct_votes;

    (card.querySelector('button[data-verdict="correct"]') as HTMLButtonElement).click();
    await app.lastAction;

    const tally = elements.results.querySelector(
      `[data-segment-id="${segmentId}"] [data-role="tally"]`,
    )!;
    expect(tally.textContent).toContain(`${beforeVotes + 1} correct`);

    const after = await (await fetch(`${BASE}/search?q=tone1000`)).json();
    const afterVotes = after.results.find(
      (r: { segment_id: string }) => r.segment_id === segmentId,
    ).correct_votes;
    expect(afterVotes).toBe(beforeVotes + 1);
  });

  it('below-threshold query shows the no-results status', async () => {
    const { app, elements } = mount();
    await app.runSearch('xylophone quartz');
    expect(elements.results.querySelectorAll('.result-card')).toHaveLength(0);
    expect(elements.results.textContent).toContain('no class above threshold');
  });

  it('link analysis yields the dominant sound for a corpus clip', async () => {
    const { app, elements } = mount();
    await app.runClassify('local://tone3000_000');
    expect(
      elements.classify.querySelector('[data-role="dominant"]')!.textContent,
    ).toBe('tone3000');
  });

  it('stats panel reflects the seeded index', async () => {
    const { app, elements } = mount();
    await app.refreshStats();
    const count = Number(
      elements.stats.querySelector('[data-role="segment-count"]')!.textContent,
    );
    expect(count).toBeGreaterThan(0);
  });
});
