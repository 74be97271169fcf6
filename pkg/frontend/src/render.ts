/**
 * HTML string renderers. No DOM dependency: every function maps server
 * state to markup, which keeps them testable in plain node and keeps the
 * client honest about never computing protocol values itself.
 */

import {
  AdjudicationView,
  AgreementPayload,
  CATEGORIES,
  DimensionKappas,
  FEEDBACK_TYPES,
  ItemView,
  KappaCell,
  LabelValues,
  NextPayload,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Monospace, line-numbered rendering of the submitted code hunk. */
export function renderCode(code: string): string {
  const lines = code.replace(/\r\n/g, "\n").split("\n");
  const rows = lines
    .map(
      (line, i) =>
        `<tr><td class="ln">${i + 1}</td><td class="src">${escapeHtml(line)}</td></tr>`,
    )
    .join("");
  return `<table class="code"><tbody>${rows}</tbody></table>`;
}

function checkbox(name: string, alias: string, checked: boolean): string {
  const id = `${name}-${alias}`;
  return (
    `<input type="checkbox" id="${id}" name="${name}" data-alias="${alias}"` +
    `${checked ? " checked" : ""}>`
  );
}

function select(
  name: string,
  alias: string,
  options: readonly string[],
  value: string | null,
  enabled: boolean,
): string {
  const id = `${name}-${alias}`;
  const opts = [`<option value=""${value ? "" : " selected"}></option>`]
    .concat(
      options.map(
        (opt) =>
          `<option value="${opt}"${opt === value ? " selected" : ""}>${opt.replace(/_/g, " ")}</option>`,
      ),
    )
    .join("");
  return (
    `<select id="${id}" name="${name}" data-alias="${alias}"` +
    `${enabled ? "" : " disabled"}>${opts}</select>`
  );
}

/**
 * One candidate's label form. The conditional controls are rendered
 * disabled until applicability is checked; app.ts re-renders on toggle.
 */
export function renderLabelForm(alias: string, draft: Partial<LabelValues> = {}): string {
  const applicable = draft.applicability === true;
  return `
<fieldset class="label-form" data-alias="${alias}">
  <label>${checkbox("semantic_equivalence", alias, draft.semantic_equivalence === true)}
    semantically equivalent to the reviewer's comment</label>
  <label>${checkbox("applicability", alias, applicable)}
    applicable (raises a valid point about this code)</label>
  <label>${checkbox("has_explanation", alias, draft.has_explanation === true)}
    includes an explanation</label>
  <label class="conditional">feedback type
    ${select("feedback_type", alias, FEEDBACK_TYPES, draft.feedback_type ?? null, applicable)}</label>
  <label class="conditional">category
    ${select("category", alias, CATEGORIES, draft.category ?? null, applicable)}</label>
  <div class="field-errors" data-alias="${alias}"></div>
  <button type="button" class="submit-label" data-alias="${alias}">Submit</button>
</fieldset>`;
}

function renderPriorLabels(values: LabelValues): string {
  const rows = Object.entries(values)
    .map(
      ([dim, value]) =>
        `<tr><td>${dim.replace(/_/g, " ")}</td><td>${value === null ? "" : escapeHtml(String(value))}</td></tr>`,
    )
    .join("");
  return `<details class="prior"><summary>first pass labels</summary><table>${rows}</table></details>`;
}

/** Blinded item view: code, reference comment, one form per candidate. */
export function renderItem(item: ItemView, drafts: Record<string, Partial<LabelValues>> = {}): string {
  const candidates = item.candidates
    .map((candidate) => {
      const prior = item.prior_labels?.[candidate.alias];
      return `
<section class="candidate" data-alias="${candidate.alias}">
  <h3>Comment ${candidate.alias}</h3>
  <blockquote>${escapeHtml(candidate.text)}</blockquote>
  ${prior ? renderPriorLabels(prior) : ""}
  ${renderLabelForm(candidate.alias, drafts[candidate.alias] ?? {})}
</section>`;
    })
    .join("");
  return `
<article class="item" data-sample-id="${escapeHtml(item.sample_id)}">
  <h2>${escapeHtml(item.sample_id)}</h2>
  <h3>Submitted code</h3>
  ${renderCode(item.m_pre)}
  <h3>Reviewer's comment</h3>
  <blockquote class="reference">${escapeHtml(item.reference)}</blockquote>
  ${candidates}
</article>`;
}

export function renderProgress(payload: NextPayload): string {
  const remaining = payload.remaining ?? 0;
  const waiting = payload.waiting_for
    ? ` <span class="waiting">waiting for ${escapeHtml(payload.waiting_for)}</span>`
    : "";
  return (
    `<div class="progress"><span class="phase">${payload.phase}</span>` +
    `<span class="remaining">${remaining} remaining</span>${waiting}</div>`
  );
}

function renderLabelCells(values: LabelValues, dims: string[]): string {
  return (Object.keys(values) as (keyof LabelValues)[])
    .map((dim) => {
      const flagged = dims.includes(dim) ? ' class="differs"' : "";
      const value = values[dim];
      return `<td${flagged}>${value === null ? "" : escapeHtml(String(value))}</td>`;
    })
    .join("");
}

/** Side-by-side disagreement table plus a resolution form per open item. */
export function renderAdjudication(items: AdjudicationView[]): string {
  if (items.length === 0) {
    return `<div class="adjudication empty">no open disagreements</div>`;
  }
  const blocks = items
    .map((item) => {
      const annotators = Object.keys(item.labels);
      const header = ["annotator", "sem. equiv.", "applicable", "explanation", "feedback", "category"]
        .map((h) => `<th>${h}</th>`)
        .join("");
      const rows = annotators
        .map(
          (annotator) =>
            `<tr><td>${escapeHtml(annotator)}</td>${renderLabelCells(item.labels[annotator]!, item.dimensions)}</tr>`,
        )
        .join("");
      const form = item.resolution
        ? `<div class="resolved">resolved</div>`
        : `<div class="resolution" data-item-id="${escapeHtml(item.item_id)}">${renderLabelForm(item.alias)}</div>`;
      return `
<section class="disagreement" data-item-id="${escapeHtml(item.item_id)}">
  <h3>${escapeHtml(item.sample_id)} / comment ${item.alias}</h3>
  <p class="dims">differs on: ${item.dimensions.join(", ").replace(/_/g, " ")}</p>
  <table class="side-by-side"><thead><tr>${header}</tr></thead><tbody>${rows}</tbody></table>
  ${form}
</section>`;
    })
    .join("");
  return `<div class="adjudication">${blocks}</div>`;
}

/**
 * A kappa value exactly as the server sent it. Not-computable dimensions
 * render as "n/a", never as 0; numbers pass through String() untouched.
 */
export function formatKappa(cell: KappaCell | null): string {
  return cell === null ? "n/a" : String(cell.kappa);
}

function dimensionRows(dimensions: DimensionKappas, attentionBelow: number): string {
  return Object.entries(dimensions)
    .map(([dimension, cell]) => {
      const attention = cell !== null && cell.kappa < attentionBelow;
      return (
        `<tr${attention ? ' class="attention"' : ""}>` +
        `<td>${dimension.replace(/_/g, " ")}</td>` +
        `<td class="kappa" data-dimension="${dimension}">${formatKappa(cell)}</td>` +
        `<td>${cell === null ? "" : cell.items}</td></tr>`
      );
    })
    .join("");
}

/** Agreement dashboard: overall table plus the per-batch curve. */
export function renderDashboard(agreement: AgreementPayload, attentionBelow = 0.4): string {
  const overall = dimensionRows(agreement.dimensions, attentionBelow);
  const batches = agreement.batches
    .map(
      (batch, i) =>
        `<tr><td>batch ${i + 1} (${batch.items} items)</td>` +
        Object.entries(batch.dimensions)
          .map(([dim, cell]) => `<td class="kappa" data-dimension="${dim}">${formatKappa(cell)}</td>`)
          .join("") +
        `</tr>`,
    )
    .join("");
  const batchHeader = Object.keys(agreement.dimensions)
    .map((dim) => `<th>${dim.replace(/_/g, " ")}</th>`)
    .join("");
  return `
<div class="dashboard" data-session-id="${escapeHtml(agreement.session_id)}">
  <h2>Agreement over ${agreement.units} judgments</h2>
  <table class="overall">
    <thead><tr><th>dimension</th><th>kappa</th><th>items</th></tr></thead>
    <tbody>${overall}</tbody>
  </table>
  <h3>Per batch</h3>
  <table class="batches">
    <thead><tr><th>batch</th>${batchHeader}</tr></thead>
    <tbody>${batches}</tbody>
  </table>
</div>`;
}

/**
 * Pull the rendered kappa texts back out of dashboard markup, keyed by
 * dimension. Tests use this to compare the display against the payload.
 */
export function extractKappaTexts(html: string): Record<string, string> {
  const out: Record<string, string> = {};
  const pattern = /<td class="kappa" data-dimension="([^"]+)">([^<]*)<\/td>/g;
  let match;
  while ((match = pattern.exec(html)) !== null) {
    const [, dimension, text] = match;
    if (dimension !== undefined && !(dimension in out)) {
      out[dimension] = text ?? "";
    }
  }
  return out;
}
