// Thin client for the curation HTTP API. All mutations go through here;
// the UI never fabricates server state.

import type {
  ApiErrorBody,
  Candidate,
  CandidateListResponse,
  Decision,
  PriorMapWire,
  SaveResponse,
} from './types.js';

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiUnreachableError extends Error {
  constructor(cause: unknown) {
    super(`curation service unreachable: ${String(cause)}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class CurationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly actor: string = 'curation-ui',
  ) {}

  overlayUrl(ref: string | null): string | null {
    return ref === null ? null : this.baseUrl.replace(/\/api\/v1$/, '') + ref;
  }

  async listCandidates(): Promise<Candidate[]> {
    const body = await this.request<CandidateListResponse>('GET', '/candidates');
    return body.candidates;
  }

  async decide(
    candidateId: string,
    decision: Decision,
    group: string | null,
    relevantFor: string[],
  ): Promise<Candidate> {
    return this.request<Candidate>(
      'POST',
      `/candidates/${encodeURIComponent(candidateId)}/decision`,
      { decision, group, relevant_for: relevantFor },
    );
  }

  async manualCandidate(t: number, pointIndex: number): Promise<Candidate> {
    return this.request<Candidate>('POST', '/candidates/manual', {
      t,
      point_index: pointIndex,
    });
  }

  async save(force: boolean): Promise<SaveResponse> {
    return this.request<SaveResponse>('POST', '/save', { force });
  }

  async draftMap(): Promise<PriorMapWire> {
    return this.request<PriorMapWire>('GET', '/map');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: {
          'Content-Type': 'application/json',
          'X-Curation-Actor': this.actor,
        },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiUnreachableError(err);
    }
    if (!response.ok) {
      let code = 'http_error';
      let message = `HTTP ${response.status}`;
      try {
        const parsed = (await response.json()) as ApiErrorBody;
        if (parsed && parsed.error) {
          code = parsed.error;
          message = parsed.message;
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiRequestError(response.status, code, message);
    }
    return (await response.json()) as T;
  }
}
