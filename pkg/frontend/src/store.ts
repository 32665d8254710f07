// UI state and the only code allowed to call mutation endpoints.
//
// Optimistic updates: a decision restyles the row immediately and is then
// reconciled with the server's response. If the service is unreachable the
// edit is parked in `unsent` (nothing is lost) and an error banner goes up;
// `retryUnsent()` replays the queue once the service is back.

import { ApiRequestError, ApiUnreachableError, CurationApi } from './api.js';
import type { Candidate, CandidateStatus, Decision, PendingEdit } from './types.js';

export type StatusFilter = 'all' | CandidateStatus;

export interface StoreState {
  candidates: Candidate[];
  filter: StatusFilter;
  page: number;
  pageSize: number;
  cursor: number; // keyboard cursor within the visible page
  unsent: PendingEdit[];
  banner: string | null;
  saveConflict: string | null; // PendingRemain message awaiting force-confirm
  savedPath: string | null;
  busy: boolean;
}

export class CurationStore {
  private state: StoreState = {
    candidates: [],
    filter: 'all',
    page: 0,
    pageSize: 8,
    cursor: 0,
    unsent: [],
    banner: null,
    saveConflict: null,
    savedPath: null,
    busy: false,
  };

  private listeners: Array<(s: StoreState) => void> = [];

  constructor(private readonly api: CurationApi) {}

  getState(): StoreState {
    return this.state;
  }

  subscribe(listener: (s: StoreState) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<StoreState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  // -- queries --------------------------------------------------------------

  visibleCandidates(): Candidate[] {
    const filtered =
      this.state.filter === 'all'
        ? this.state.candidates
        : this.state.candidates.filter((c) => c.status === this.state.filter);
    const start = this.state.page * this.state.pageSize;
    return filtered.slice(start, start + this.state.pageSize);
  }

  pageCount(): number {
    const filtered =
      this.state.filter === 'all'
        ? this.state.candidates
        : this.state.candidates.filter((c) => c.status === this.state.filter);
    return Math.max(1, Math.ceil(filtered.length / this.state.pageSize));
  }

  pendingCount(): number {
    return this.state.candidates.filter((c) => c.status === 'pending').length;
  }

  cursorCandidate(): Candidate | null {
    return this.visibleCandidates()[this.state.cursor] ?? null;
  }

  // -- navigation -----------------------------------------------------------

  setFilter(filter: StatusFilter): void {
    this.update({ filter, page: 0, cursor: 0 });
  }

  setPage(page: number): void {
    const clamped = Math.min(Math.max(0, page), this.pageCount() - 1);
    this.update({ page: clamped, cursor: 0 });
  }

  moveCursor(delta: number): void {
    const visible = this.visibleCandidates().length;
    if (visible === 0) return;
    const cursor = Math.min(Math.max(0, this.state.cursor + delta), visible - 1);
    this.update({ cursor });
  }

  dismissBanner(): void {
    this.update({ banner: null });
  }

  // -- server sync ----------------------------------------------------------

  async refresh(): Promise<void> {
    this.update({ busy: true });
    try {
      const candidates = await this.api.listCandidates();
      this.update({ candidates, banner: null, busy: false });
    } catch (err) {
      this.update({ banner: describeError(err), busy: false });
    }
  }

  /** Accept/reject with optimistic restyle and server reconciliation. */
  async decide(
    candidateId: string,
    decision: Decision,
    group: string | null = null,
    relevantFor: string[] = [],
  ): Promise<void> {
    this.applyLocal({ candidateId, decision, group, relevantFor });
    try {
      const confirmed = await this.api.decide(candidateId, decision, group, relevantFor);
      this.replaceCandidate(confirmed);
      this.update({ banner: null });
    } catch (err) {
      if (err instanceof ApiUnreachableError) {
        // keep the optimistic edit visible and queue it for retry
        this.update({
          unsent: [...this.state.unsent, { candidateId, decision, group, relevantFor }],
          banner: describeError(err),
        });
        return;
      }
      // server rejected it: roll back to server truth, then surface why
      await this.refresh();
      this.update({ banner: describeError(err) });
    }
  }

  /** Put an accepted candidate into a group (or clear it with null). */
  async assignGroup(candidateId: string, group: string | null): Promise<void> {
    const current = this.state.candidates.find((c) => c.id === candidateId);
    const relevantFor = current?.relevant_for ?? [];
    await this.decide(candidateId, 'accept', group, relevantFor);
  }

  async retryUnsent(): Promise<void> {
    const queue = this.state.unsent;
    if (!queue.length) return;
    this.update({ unsent: [] });
    for (const edit of queue) {
      await this.decide(edit.candidateId, edit.decision, edit.group, edit.relevantFor);
    }
    if (!this.state.unsent.length) {
      await this.refresh();
    }
  }

  /** Save flow: a PendingRemain conflict surfaces for explicit confirmation. */
  async save(force = false): Promise<void> {
    this.update({ busy: true, saveConflict: null });
    try {
      const result = await this.api.save(force);
      this.update({ savedPath: result.path, busy: false, banner: null });
    } catch (err) {
      if (err instanceof ApiRequestError && err.code === 'pending_remain') {
        this.update({ saveConflict: err.message, busy: false });
        return;
      }
      this.update({ banner: describeError(err), busy: false });
    }
  }

  cancelForceSave(): void {
    this.update({ saveConflict: null });
  }

  // -- internals ------------------------------------------------------------

  private applyLocal(edit: PendingEdit): void {
    const candidates = this.state.candidates.map((c) =>
      c.id === edit.candidateId
        ? {
            ...c,
            status: (edit.decision === 'accept' ? 'accepted' : 'rejected') as CandidateStatus,
            group: edit.group,
            relevant_for: edit.relevantFor,
          }
        : c,
    );
    this.update({ candidates });
  }

  private replaceCandidate(confirmed: Candidate): void {
    this.update({
      candidates: this.state.candidates.map((c) => (c.id === confirmed.id ? confirmed : c)),
    });
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiUnreachableError) {
    return 'Curation service unreachable. Edits are kept locally; retry when the service is back.';
  }
  if (err instanceof ApiRequestError) {
    return `${err.code}: ${err.message}`;
  }
  return String(err);
}
