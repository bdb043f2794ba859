/**
 * Typed REST client for the annotation session service.
 *
 * Thin wrapper over fetch: one method per endpoint, JSON in/out, and a
 * typed ApiError carrying the HTTP status so callers can tell conflicts
 * (409, somebody else annotated first) from validation problems (400/422).
 */

export interface CorpusInfo {
  documents: number;
  embeddings: number;
  has_gold_labels: boolean;
}

export interface Health {
  status: string;
  version: string;
  corpora: Record<string, CorpusInfo>;
}

export interface Progress {
  status: string;
  cursor: number;
  n_ranked: number;
  total_annotations: number;
  per_class_counts: Record<string, number>;
  labels: string[];
  n_shots: number;
  n_classes: number;
  theta_so_far: number;
  truncated: boolean;
  method: string;
}

export interface SessionSummary {
  session_id: string;
  status: string;
  corpus: string;
  error?: string;
  progress?: Progress;
}

/** Payload of GET /sessions/{id}/next while the session is active. */
export interface HeadDocument {
  id: string;
  text: string;
  rank: number;
  progress: Progress;
}

/** Payload of GET /sessions/{id}/next once the stopping rule fired. */
export interface FinishedSession {
  status: string;
  theta: number | null;
  progress: Progress;
}

export type NextPayload = HeadDocument | FinishedSession;

export function isHeadDocument(payload: NextPayload): payload is HeadDocument {
  return (payload as HeadDocument).id !== undefined;
}

export interface CreateSessionInput {
  method: string;
  n_shots: number;
  corpus?: string;
  labels?: string[];
  allow_new_labels?: boolean;
  seed?: number;
  beta?: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') {
      detail = body.detail;
    } else if (body.detail !== undefined) {
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiError(response.status, detail);
}

export class Client {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  healthz(): Promise<Health> {
    return this.request<Health>('/healthz');
  }

  createSession(input: CreateSessionInput): Promise<SessionSummary> {
    return this.request<SessionSummary>('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(input),
    });
  }

  getSession(sessionId: string): Promise<SessionSummary> {
    return this.request<SessionSummary>(`/sessions/${sessionId}`);
  }

  next(sessionId: string): Promise<NextPayload> {
    return this.request<NextPayload>(`/sessions/${sessionId}/next`);
  }

  annotate(
    sessionId: string,
    docId: string,
    label: string,
  ): Promise<{ progress: Progress }> {
    return this.request<{ progress: Progress }>(
      `/sessions/${sessionId}/annotations`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ doc_id: docId, label }),
      },
    );
  }

  exportUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/export`;
  }

  async exportText(sessionId: string): Promise<string> {
    const response = await fetch(this.exportUrl(sessionId));
    if (!response.ok) {
      await parseError(response);
    }
    return response.text();
  }
}
