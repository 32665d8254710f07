// Store behavior against the recorded mock API: the accept -> group -> save
// flow, the PendingRemain conflict, and resilience when the service is down.

import { describe, expect, it } from 'vitest';

import { CurationApi } from '../src/api';
import { CurationStore } from '../src/store';
import type { Candidate } from '../src/types';
import { MockServer } from './mockFetch';
import fixture from './fixtures/recorded_api.json';

const BASE = 'http://mock/api/v1';
const initialCandidates = fixture.candidates_initial.candidates as Candidate[];
const firstId = initialCandidates[0]!.id;

function makeStore(server: MockServer): CurationStore {
  return new CurationStore(new CurationApi(BASE, server.fetch));
}

function serverWithList(): MockServer {
  return new MockServer().on('GET', '/api/v1/candidates', {
    body: fixture.candidates_initial,
  });
}

describe('loading', () => {
  it('lists the six recorded candidates, all pending', async () => {
    const store = makeStore(serverWithList());
    await store.refresh();
    const state = store.getState();
    expect(state.candidates).toHaveLength(6);
    expect(state.candidates.every((c) => c.status === 'pending')).toBe(true);
    expect(state.banner).toBeNull();
  });

  it('paginates and filters', async () => {
    const store = makeStore(serverWithList());
    await store.refresh();
    store.setFilter('pending');
    expect(store.visibleCandidates().length).toBe(6);
    store.setFilter('accepted');
    expect(store.visibleCandidates().length).toBe(0);
  });
});

describe('accept -> group -> save flow', () => {
  it('completes against recorded responses', async () => {
    const accepted = { ...(fixture.candidate_accepted as Candidate), group: 'gx' };
    const server = serverWithList()
      .on('POST', `/api/v1/candidates/${firstId}/decision`, { body: accepted })
      .on(
        'POST',
        '/api/v1/save',
        { status: fixture.save_pending_conflict.status, body: fixture.save_pending_conflict.body },
        { status: 200, body: fixture.save_success.body },
      );
    const store = makeStore(server);
    await store.refresh();

    await store.decide(firstId, 'accept', 'gx', ['avenue-east']);
    const candidate = store.getState().candidates.find((c) => c.id === firstId)!;
    expect(candidate.status).toBe('accepted');
    expect(candidate.group).toBe('gx');

    // first save hits the recorded PendingRemain conflict
    await store.save(false);
    expect(store.getState().saveConflict).toContain('pending');
    expect(store.getState().savedPath).toBeNull();

    // explicit force completes with the recorded success payload
    await store.save(true);
    expect(store.getState().saveConflict).toBeNull();
    expect(store.getState().savedPath).toBe(fixture.save_success.body.path);

    const saveCalls = server.calls.filter((c) => c.path === '/api/v1/save');
    expect(saveCalls.map((c) => (c.body as { force: boolean }).force)).toEqual([false, true]);
  });

  it('decision request carries the wire fields the service expects', async () => {
    const server = serverWithList().on('POST', `/api/v1/candidates/${firstId}/decision`, {
      body: fixture.candidate_accepted,
    });
    const store = makeStore(server);
    await store.refresh();
    await store.decide(firstId, 'accept', null, ['avenue-east']);
    const call = server.calls.find((c) => c.method === 'POST')!;
    expect(call.body).toEqual({ decision: 'accept', group: null, relevant_for: ['avenue-east'] });
  });

  it('rolls back to server truth when the service rejects a decision', async () => {
    const server = serverWithList().on('POST', '/api/v1/candidates/zzz/decision', {
      status: fixture.unknown_candidate.status,
      body: fixture.unknown_candidate.body,
    });
    const store = makeStore(server);
    await store.refresh();
    await store.decide('zzz', 'accept');
    expect(store.getState().banner).toContain('unknown_candidate');
    // list refreshed from the server; no phantom candidate appeared
    expect(store.getState().candidates).toHaveLength(6);
  });
});

describe('service down', () => {
  it('keeps unsent edits and shows the error banner', async () => {
    const server = serverWithList();
    const store = makeStore(server);
    await store.refresh();

    server.down = true;
    await store.decide(firstId, 'accept', null, ['avenue-east']);

    const state = store.getState();
    expect(state.banner).toContain('unreachable');
    expect(state.unsent).toEqual([
      { candidateId: firstId, decision: 'accept', group: null, relevantFor: ['avenue-east'] },
    ]);
    // the optimistic restyle stays visible so the operator's work isn't lost
    expect(state.candidates.find((c) => c.id === firstId)!.status).toBe('accepted');
  });

  it('retries queued edits once the service is back', async () => {
    const server = serverWithList().on('POST', `/api/v1/candidates/${firstId}/decision`, {
      body: fixture.candidate_accepted,
    });
    const store = makeStore(server);
    await store.refresh();

    server.down = true;
    await store.decide(firstId, 'accept');
    expect(store.getState().unsent).toHaveLength(1);

    server.down = false;
    await store.retryUnsent();
    expect(store.getState().unsent).toHaveLength(0);
    expect(store.getState().banner).toBeNull();
  });

  it('refresh failure raises the banner but keeps prior data', async () => {
    const server = serverWithList();
    const store = makeStore(server);
    await store.refresh();
    server.down = true;
    await store.refresh();
    expect(store.getState().banner).toContain('unreachable');
    expect(store.getState().candidates).toHaveLength(6);
  });
});
