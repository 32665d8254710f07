// Renderers are pure string producers, so structural assertions need no DOM.

import { describe, expect, it } from 'vitest';

import { CurationApi } from '../src/api';
import { renderApp, renderCandidateList, renderSaveBar } from '../src/render';
import { CurationStore } from '../src/store';
import type { Candidate } from '../src/types';
import { MockServer } from './mockFetch';
import fixture from './fixtures/recorded_api.json';

const firstId = (fixture.candidates_initial.candidates as Candidate[])[0]!.id;

async function loadedStore(server = new MockServer()): Promise<[CurationStore, MockServer]> {
  server.on('GET', '/api/v1/candidates', { body: fixture.candidates_initial });
  const store = new CurationStore(new CurationApi('http://mock/api/v1', server.fetch));
  await store.refresh();
  return [store, server];
}

describe('candidate list', () => {
  it('renders the six recorded candidates as rows', async () => {
    const [store] = await loadedStore();
    const html = renderCandidateList(store);
    expect(html.match(/<tr class="candidate/g)).toHaveLength(6);
    for (const c of fixture.candidates_initial.candidates) {
      expect(html).toContain(`data-id="${c.id}"`);
    }
  });

  it('restyles a row after an accept round-trip', async () => {
    const server = new MockServer().on('POST', `/api/v1/candidates/${firstId}/decision`, {
      body: fixture.candidate_accepted,
    });
    const [store] = await loadedStore(server);
    expect(renderCandidateList(store)).toContain('status-pending');
    await store.decide(firstId, 'accept');
    const html = renderCandidateList(store);
    expect(html).toContain('status-accepted');
  });

  it('links overlays through the provided URL mapper', async () => {
    const [store] = await loadedStore();
    const api = new CurationApi('http://mock/api/v1');
    const html = renderCandidateList(store, (ref) => api.overlayUrl(ref));
    expect(html).toContain('href="http://mock/api/v1/frames/'.replace('/api/v1/frames/', '/api/v1/frames/'));
    expect(html).toContain('http://mock/api/v1/frames/');
  });
});

describe('save bar', () => {
  it('offers save when idle and force only after a conflict', async () => {
    const server = new MockServer().on('POST', '/api/v1/save', {
      status: fixture.save_pending_conflict.status,
      body: fixture.save_pending_conflict.body,
    });
    const [store] = await loadedStore(server);
    expect(renderSaveBar(store)).toContain('data-action="save"');
    await store.save(false);
    const html = renderSaveBar(store);
    expect(html).toContain('data-action="force-save"');
    expect(html).toContain('pending candidates will be dropped');
    expect(html).toContain('disabled'); // force needs the explicit checkbox
  });
});

describe('full app shell', () => {
  it('renders banner, toolbar, table, groups and save bar together', async () => {
    const [store] = await loadedStore();
    const html = renderApp(store);
    expect(html).toContain('traffic-light map curation');
    expect(html).toContain('pending (6)');
    expect(html).toContain('class="group-editor"');
    expect(html).toContain('data-action="save"');
  });

  it('shows the error banner with a retry control when edits are queued', async () => {
    const [store, server] = await loadedStore();
    server.down = true;
    await store.decide(firstId, 'accept');
    const html = renderApp(store);
    expect(html).toContain('class="banner error"');
    expect(html).toContain('retry 1 unsent edit');
  });
});
