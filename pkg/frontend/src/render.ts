// Pure HTML-string renderers: state in, markup out. The mount layer in
// main.ts owns the DOM; tests assert on these strings directly.

import { groupWarnings, GROUP_LINK_RADIUS_M, maxPairwiseDistance } from './distance.js';
import type { CurationStore } from './store.js';
import type { Candidate } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(n: number, digits = 2): string {
  return n.toFixed(digits);
}

export function renderBanner(store: CurationStore): string {
  const { banner, unsent } = store.getState();
  if (!banner) return '';
  const retry = unsent.length
    ? `<button data-action="retry-unsent">retry ${unsent.length} unsent edit(s)</button>`
    : '';
  return `<div class="banner error" role="alert">${escapeHtml(banner)} ${retry}
    <button data-action="dismiss-banner">×</button></div>`;
}

export function renderToolbar(store: CurationStore): string {
  const { filter, page, candidates } = store.getState();
  const counts = {
    all: candidates.length,
    pending: candidates.filter((c) => c.status === 'pending').length,
    accepted: candidates.filter((c) => c.status === 'accepted').length,
    rejected: candidates.filter((c) => c.status === 'rejected').length,
  };
  const tabs = (['all', 'pending', 'accepted', 'rejected'] as const)
    .map(
      (f) =>
        `<button data-action="filter" data-filter="${f}"
           class="tab ${f === filter ? 'active' : ''}">${f} (${counts[f]})</button>`,
    )
    .join('');
  const pages = store.pageCount();
  return `<div class="toolbar">${tabs}
    <span class="pager">
      <button data-action="page" data-page="${page - 1}" ${page === 0 ? 'disabled' : ''}>‹</button>
      page ${page + 1}/${pages}
      <button data-action="page" data-page="${page + 1}" ${page >= pages - 1 ? 'disabled' : ''}>›</button>
    </span></div>`;
}

function renderRow(c: Candidate, selected: boolean, overlayHref: string | null): string {
  const [x, y, z] = c.centroid;
  const overlay = overlayHref
    ? `<a href="${escapeHtml(overlayHref)}" target="_blank">overlay</a>`
    : '<span class="dim">no overlay</span>';
  return `<tr class="candidate status-${c.status} ${selected ? 'selected' : ''}"
      data-id="${escapeHtml(c.id)}" tabindex="0">
    <td class="id">${escapeHtml(c.id)}</td>
    <td class="status">${c.status}</td>
    <td class="num">${c.support}</td>
    <td class="num">(${fmt(x, 1)}, ${fmt(y, 1)}, ${fmt(z, 1)})</td>
    <td>${escapeHtml(c.group ?? '—')}</td>
    <td>${overlay}</td>
    <td class="actions">
      <button data-action="accept" data-id="${escapeHtml(c.id)}">accept (a)</button>
      <button data-action="reject" data-id="${escapeHtml(c.id)}">reject (r)</button>
      <button data-action="group" data-id="${escapeHtml(c.id)}">group… (g)</button>
    </td></tr>`;
}

export function renderCandidateList(
  store: CurationStore,
  overlayHref: (ref: string | null) => string | null = (ref) => ref,
): string {
  const visible = store.visibleCandidates();
  const cursor = store.getState().cursor;
  if (!visible.length) {
    return '<p class="empty">no candidates match this filter</p>';
  }
  const rows = visible
    .map((c, i) => renderRow(c, i === cursor, overlayHref(c.overlay_ref)))
    .join('\n');
  return `<table class="candidates">
    <thead><tr><th>id</th><th>status</th><th>support</th>
      <th>centroid (m)</th><th>group</th><th>frame</th><th></th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderGroupEditor(store: CurationStore): string {
  const accepted = store.getState().candidates.filter((c) => c.status === 'accepted');
  const byGroup = new Map<string, Candidate[]>();
  for (const c of accepted) {
    const key = c.group ?? '(auto-link on save)';
    byGroup.set(key, [...(byGroup.get(key) ?? []), c]);
  }
  const warnings = new Map(groupWarnings(accepted).map((w) => [w.group, w]));
  const blocks: string[] = [];
  for (const [group, members] of [...byGroup.entries()].sort()) {
    const spread = maxPairwiseDistance(members.map((m) => m.centroid));
    const warning = warnings.get(group);
    const badge = warning
      ? `<span class="warn" role="note">⚠ members span ${fmt(warning.maxDistance, 1)} m,
           beyond the ${GROUP_LINK_RADIUS_M} m linking guidance</span>`
      : '';
    const items = members
      .map(
        (m) => `<li>${escapeHtml(m.id)}
          <button data-action="ungroup" data-id="${escapeHtml(m.id)}">remove</button></li>`,
      )
      .join('');
    blocks.push(`<div class="group" data-group="${escapeHtml(group)}">
      <h3>${escapeHtml(group)} <small>${members.length} light(s),
        max spread ${fmt(spread, 1)} m</small> ${badge}</h3>
      <ul>${items}</ul></div>`);
  }
  return `<section class="group-editor"><h2>groups</h2>
    ${blocks.join('\n') || '<p class="empty">accept candidates to group them</p>'}</section>`;
}

export function renderSaveBar(store: CurationStore): string {
  const { saveConflict, savedPath, busy } = store.getState();
  const pending = store.pendingCount();
  if (saveConflict) {
    return `<div class="savebar conflict">
      <span class="warn">${escapeHtml(saveConflict)}</span>
      <label><input type="checkbox" data-role="force-confirm"> I understand pending candidates will be dropped</label>
      <button data-action="force-save" disabled>force save</button>
      <button data-action="cancel-force">cancel</button></div>`;
  }
  const saved = savedPath ? `<span class="ok">saved to ${escapeHtml(savedPath)}</span>` : '';
  return `<div class="savebar">
    <span>${pending} pending</span>
    <button data-action="save" ${busy ? 'disabled' : ''}>save map</button>
    ${saved}</div>`;
}

export function renderApp(
  store: CurationStore,
  overlayHref: (ref: string | null) => string | null = (ref) => ref,
): string {
  return `${renderBanner(store)}
    <header><h1>traffic-light map curation</h1></header>
    ${renderToolbar(store)}
    ${renderCandidateList(store, overlayHref)}
    ${renderGroupEditor(store)}
    ${renderSaveBar(store)}`;
}
