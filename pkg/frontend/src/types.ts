// Wire types mirroring the curation-service JSON API (/api/v1).

export type CandidateStatus = 'pending' | 'accepted' | 'rejected';

export interface Candidate {
  id: string;
  centroid: [number, number, number];
  support: number;
  source_frame_range: [number, number];
  status: CandidateStatus;
  group: string | null;
  relevant_for: string[];
  overlay_ref: string | null;
}

export interface CandidateListResponse {
  candidates: Candidate[];
}

export interface MapLightWire {
  id: string;
  position: [number, number, number];
  relevant_for: string[];
}

export interface MapGroupWire {
  id: string;
  light_ids: string[];
}

export interface PriorMapWire {
  version: number;
  route_id: string;
  lights: MapLightWire[];
  groups: MapGroupWire[];
}

export interface SaveResponse {
  path: string;
  map: PriorMapWire;
}

export interface ApiErrorBody {
  error: string;
  message: string;
}

export type Decision = 'accept' | 'reject';

// An edit the user made that has not been confirmed by the server
// (kept around verbatim when the API is unreachable).
export interface PendingEdit {
  candidateId: string;
  decision: Decision;
  group: string | null;
  relevantFor: string[];
}
