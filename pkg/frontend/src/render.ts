// HTML-string renderers for the result grid, link analysis and stats.

import { CardState } from './state.js';
import { ClassifyResponse, StatsResponse } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

/** Link to the source at the segment offset (media-fragment syntax). */
export function offsetUrl(mediaUrl: string, offsetS: number): string {
  return `${mediaUrl}#t=${offsetS}`;
}

function confidencePercent(confidence: number): string {
  return `${(confidence * 100).toFixed(1)}%`;
}

export function renderCard(card: CardState): string {
  const r = card.result;
  const disabled = card.inFlight || card.stale ? ' disabled' : '';
  const staleNote = card.stale ? '<span class="stale">segment gone</span>' : '';
  const thumb = r.thumbnail_url
    ? `<img class="thumb" src="${escapeHtml(r.thumbnail_url)}" alt="">`
    : '';
  return `
    <div class="result-card${card.stale ? ' is-stale' : ''}" data-segment-id="${escapeHtml(r.segment_id)}">
      ${thumb}
      <h3><a href="${escapeHtml(offsetUrl(r.media_url, r.offset_s))}" target="_blank" rel="noopener">${escapeHtml(r.title)}</a></h3>
      <p class="meta">
        <span class="label">${escapeHtml(r.predicted_class)}</span>
        <span class="confidence">${confidencePercent(r.confidence)}</span>
        <span class="offset">@ ${r.offset_s.toFixed(1)}s</span>
      </p>
      <p class="votes">
        <button type="button" data-verdict="correct"${disabled}>Correct</button>
        <button type="button" data-verdict="incorrect"${disabled}>Incorrect</button>
        <span class="tally" data-role="tally">${r.correct_votes} correct / ${r.incorrect_votes} incorrect</span>
        ${staleNote}
      </p>
    </div>`;
}

export function renderResults(status: string, cards: CardState[]): string {
  if (status !== 'ok') {
    // the backend's explanation is shown verbatim
    return `<p class="status" data-role="status">${escapeHtml(status)}</p>`;
  }
  if (cards.length === 0) {
    return '<p class="status" data-role="status">no indexed segments for this class yet</p>';
  }
  return `<div class="result-grid">${cards.map(renderCard).join('')}</div>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner" data-role="error">${escapeHtml(message)} <em>(retry in a moment)</em></div>`;
}

export function renderValidation(message: string): string {
  return `<p class="validation" data-role="validation">${escapeHtml(message)}</p>`;
}

export function renderClassify(response: ClassifyResponse): string {
  const rows = response.segments
    .map(
      (s) =>
        `<li><span class="offset">${s.offset_s.toFixed(1)}s</span> ` +
        `<span class="label">${escapeHtml(s.label)}</span> ` +
        `<span class="confidence">${confidencePercent(s.confidence)}</span></li>`,
    )
    .join('');
  return `
    <div class="dominant-panel">
      <p>Dominant sound: <strong data-role="dominant">${escapeHtml(response.dominant_class)}</strong></p>
      <ol class="timeline">${rows}</ol>
    </div>`;
}

export function renderClassifyRejection(kind: 'rejected-duration' | 'upstream-error', detail: string): string {
  const message =
    kind === 'rejected-duration'
      ? `clip duration is outside the admitted 2 s – 10 min range (${detail})`
      : `the source could not provide this link (${detail})`;
  return `<p class="status" data-role="classify-error">${escapeHtml(message)}</p>`;
}

export function renderStats(stats: StatsResponse): string {
  const perClass = Object.entries(stats.per_class_counts)
    .map(([label, count]) => `<li>${escapeHtml(label)}: ${count}</li>`)
    .join('');
  return `
    <dl class="stats">
      <dt>segments</dt><dd data-role="segment-count">${stats.segment_count}</dd>
      <dt>hours indexed</dt><dd>${stats.hours_indexed.toFixed(2)}</dd>
      <dt>feedback votes</dt><dd>${stats.feedback_count}</dd>
    </dl>
    <ul class="per-class">${perClass}</ul>`;
}
