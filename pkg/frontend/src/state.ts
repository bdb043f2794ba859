/**
 * View-state machine for the annotation UI.
 *
 * Pure data + transition helpers, no DOM access: every view renders only
 * what the server reported (counts and theta are never computed client-side,
 * the stopping rule stays authoritative on the server).
 */

import type {
  CorpusInfo,
  HeadDocument,
  NextPayload,
  Progress,
} from './api.js';
import { isHeadDocument } from './api.js';

export type View =
  | { kind: 'form'; corpora: Record<string, CorpusInfo>; error?: string }
  | { kind: 'pending'; sessionId: string }
  | {
      kind: 'annotating';
      sessionId: string;
      doc: HeadDocument;
      progress: Progress;
      notice?: string;
    }
  | {
      kind: 'finished';
      sessionId: string;
      status: string;
      theta: number | null;
      progress: Progress;
    }
  | { kind: 'failed'; message: string; corpora: Record<string, CorpusInfo> };

export interface ProgressRow {
  label: string;
  count: number;
  target: number;
  fraction: number;
}

/** One bar per class, in the server's label order, capped at 100%. */
export function progressRows(progress: Progress): ProgressRow[] {
  return progress.labels.map((label) => {
    const count = progress.per_class_counts[label] ?? 0;
    return {
      label,
      count,
      target: progress.n_shots,
      fraction: Math.min(1, count / progress.n_shots),
    };
  });
}

export function formatTheta(theta: number | null): string {
  return theta === null ? 'n/a' : theta.toFixed(4);
}

/** Textual progress bar, filled proportionally to fraction in [0, 1]. */
export function progressBarText(fraction: number, width = 10): string {
  const filled = Math.round(Math.min(1, Math.max(0, fraction)) * width);
  return '▓'.repeat(filled) + '░'.repeat(width - filled);
}

/** Map the /next payload onto the matching view. */
export function viewFromNext(
  sessionId: string,
  payload: NextPayload,
  notice?: string,
): View {
  if (isHeadDocument(payload)) {
    return {
      kind: 'annotating',
      sessionId,
      doc: payload,
      progress: payload.progress,
      notice,
    };
  }
  return {
    kind: 'finished',
    sessionId,
    status: payload.status,
    theta: payload.theta,
    progress: payload.progress,
  };
}

/** Parse the comma-separated labels field of the start form. */
export function parseLabelsInput(raw: string): string[] | undefined {
  const labels = raw
    .split(',')
    .map((piece) => piece.trim())
    .filter((piece) => piece.length > 0);
  return labels.length > 0 ? labels : undefined;
}
