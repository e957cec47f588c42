// Pure HTML renderers for the console views. Everything shown here is
// server-provided state; no model quantities are computed in the browser.

import { HistoryRow, ObjectiveDisplay, QueryView, ResultView, SessionView } from './api';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function formatValue(value: number): string {
  return Math.abs(value) >= 100 ? value.toFixed(1) : value.toPrecision(4);
}

/** Horizontal bar for one objective, scaled by the normalized value. */
function objectiveBar(d: ObjectiveDisplay): string {
  const width = Math.round(Math.min(Math.max(d.normalized, 0), 1) * 100);
  const unit = d.unit ? ` ${escapeHtml(d.unit)}` : '';
  return `<div class="objective-bar" data-objective="${escapeHtml(d.name)}">
    <span class="objective-name">${escapeHtml(d.name)}</span>
    <span class="bar"><span class="fill" style="width:${width}%"></span></span>
    <span class="objective-value">${formatValue(d.value)}${unit}</span>
  </div>`;
}

function normalizedDetail(display: ObjectiveDisplay[]): string {
  const rows = display
    .map((d) => `<li>${escapeHtml(d.name)}: ${d.normalized.toPrecision(6)}</li>`)
    .join('');
  return `<details class="normalized-detail"><summary>normalized values</summary><ul>${rows}</ul></details>`;
}

export function renderQuery(query: QueryView, busy: boolean): string {
  const bars = query.display.map(objectiveBar).join('');
  const disabled = busy ? ' disabled' : '';
  return `<section class="query">
  <h2>Is this trade-off acceptable?</h2>
  <p class="progress">question ${query.round} of ${query.total}</p>
  ${bars}
  ${normalizedDetail(query.display)}
  <div class="actions">
    <button id="accept" data-answer="1"${disabled}>Accept (A)</button>
    <button id="reject" data-answer="0"${disabled}>Reject (R)</button>
  </div>
</section>`;
}

/** Signed preference bar: negative weights extend left of the axis. */
function preferenceBar(name: string, weight: number, maxAbs: number): string {
  const width = Math.round((Math.abs(weight) / maxAbs) * 50);
  const side = weight < 0 ? 'negative' : 'positive';
  return `<div class="preference-bar ${side}" data-objective="${escapeHtml(name)}">
    <span class="objective-name">${escapeHtml(name)}</span>
    <span class="bar"><span class="fill ${side}" style="width:${width}%"></span></span>
    <span class="weight">${weight.toPrecision(3)}</span>
  </div>`;
}

export function renderResult(result: ResultView): string {
  const maxAbs = Math.max(...result.theta_hat.map(Math.abs), 1e-12);
  const bars = result.theta_hat
    .map((w, i) => preferenceBar(result.final_value_display[i]?.name ?? `objective ${i + 1}`, w, maxAbs))
    .join('');
  const values = result.final_value_display.map(objectiveBar).join('');
  const policyRows = result.final_policy
    .map(
      (row, x) =>
        `<tr><td>context ${x + 1}</td><td>${row.map((p) => p.toFixed(3)).join(' ')}</td></tr>`,
    )
    .join('');
  return `<section class="result">
  <h2>Recommended policy</h2>
  <h3>Elicited trade-off</h3>
  ${bars}
  <h3>Objective values</h3>
  ${values}
  ${normalizedDetail(result.final_value_display)}
  <details class="policy-detail"><summary>per-context action distribution</summary>
    <table>${policyRows}</table>
  </details>
</section>`;
}

export function renderHistory(history: HistoryRow[]): string {
  const rows = history
    .map((h) => {
      const summary = h.display
        .map((d) => `${escapeHtml(d.name)} ${formatValue(d.value)}`)
        .join(', ');
      const verdict = h.answer === 1 ? 'accepted' : 'rejected';
      return `<li class="history-row ${verdict}">round ${h.round}: ${summary} &mdash; ${verdict}</li>`;
    })
    .join('');
  return `<ol class="history">${rows}</ol>`;
}

export function renderSession(view: SessionView, busy: boolean, lastError: string | null): string {
  const parts: string[] = [];
  if (lastError) {
    parts.push(
      `<div class="error">${escapeHtml(lastError)} <button id="retry">Retry</button></div>`,
    );
  }
  if (view.state === 'expired') {
    parts.push('<section class="expired"><h2>Session expired</h2></section>');
  } else if (view.state === 'completed' && view.result) {
    parts.push(renderResult(view.result));
  } else if (view.query) {
    parts.push(renderQuery(view.query, busy));
  }
  if (view.history && view.history.length > 0) {
    parts.push('<h3>History</h3>', renderHistory(view.history));
  }
  return parts.join('\n');
}
