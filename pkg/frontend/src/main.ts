// DOM bootstrap: wires the store to the document, delegates clicks, and
// binds the keyboard (j/k move, a accept, r reject, g group, s save).

import { CurationApi } from './api.js';
import { renderApp } from './render.js';
import { CurationStore } from './store.js';

function apiBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('api') ?? 'http://127.0.0.1:8714/api/v1';
}

const api = new CurationApi(apiBaseUrl());
const store = new CurationStore(api);
const root = document.getElementById('app')!;

function draw(): void {
  root.innerHTML = renderApp(store, (ref) => api.overlayUrl(ref));
  const forceConfirm = root.querySelector<HTMLInputElement>('[data-role="force-confirm"]');
  const forceButton = root.querySelector<HTMLButtonElement>('[data-action="force-save"]');
  if (forceConfirm && forceButton) {
    forceConfirm.addEventListener('change', () => {
      forceButton.disabled = !forceConfirm.checked;
    });
  }
}

store.subscribe(draw);

root.addEventListener('click', (event) => {
  const target = (event.target as HTMLElement).closest('[data-action]');
  if (!(target instanceof HTMLElement)) return;
  const id = target.dataset.id ?? '';
  switch (target.dataset.action) {
    case 'accept':
      void store.decide(id, 'accept');
      break;
    case 'reject':
      void store.decide(id, 'reject');
      break;
    case 'group': {
      const group = window.prompt('group id (empty clears, auto-links on save):', '');
      if (group !== null) void store.assignGroup(id, group.trim() || null);
      break;
    }
    case 'ungroup':
      void store.assignGroup(id, null);
      break;
    case 'filter':
      store.setFilter((target.dataset.filter ?? 'all') as never);
      break;
    case 'page':
      store.setPage(Number(target.dataset.page));
      break;
    case 'save':
      void store.save(false);
      break;
    case 'force-save':
      void store.save(true);
      break;
    case 'cancel-force':
      store.cancelForceSave();
      break;
    case 'retry-unsent':
      void store.retryUnsent();
      break;
    case 'dismiss-banner':
      store.dismissBanner();
      break;
  }
});

document.addEventListener('keydown', (event) => {
  if (event.target instanceof HTMLInputElement) return;
  const current = store.cursorCandidate();
  switch (event.key) {
    case 'j':
    case 'ArrowDown':
      store.moveCursor(1);
      event.preventDefault();
      break;
    case 'k':
    case 'ArrowUp':
      store.moveCursor(-1);
      event.preventDefault();
      break;
    case 'a':
      if (current) void store.decide(current.id, 'accept');
      break;
    case 'r':
      if (current) void store.decide(current.id, 'reject');
      break;
    case 'g':
      if (current) {
        const group = window.prompt('group id (empty clears):', current.group ?? '');
        if (group !== null) void store.assignGroup(current.id, group.trim() || null);
      }
      break;
    case 's':
      void store.save(false);
      break;
  }
});

void store.refresh();
