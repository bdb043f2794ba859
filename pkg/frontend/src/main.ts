/**
 * Application wiring: owns the current view, talks to the service through
 * the api client, and re-renders after every server response.
 *
 * Conflict protocol: a 409 on an annotation post means another submission
 * (double click, second tab) claimed the document first — the app silently
 * refetches the head instead of showing an error.
 */

import { ApiError, Client } from './api.js';
import type { CreateSessionInput } from './api.js';
import { labelIndexForKey, shouldIgnoreKeyEvent } from './keyboard.js';
import type { View } from './state.js';
import { viewFromNext } from './state.js';
import { render } from './view.js';
import type { Handlers } from './view.js';

const PENDING_POLL_MS = 250;

export class App {
  private view: View = { kind: 'form', corpora: {} };
  private sessionId: string | null = null;
  private allowNewLabels = false;
  private readonly handlers: Handlers;

  constructor(
    private readonly container: HTMLElement,
    private readonly client: Client,
  ) {
    this.handlers = {
      onStart: (input) => void this.startSession(input),
      onLabel: (label) => void this.submitLabel(label),
      onReset: () => void this.showForm(),
    };
    container.ownerDocument.addEventListener('keydown', (event) => {
      this.onKeydown(event);
    });
  }

  /** Load corpora info and show the start form. */
  async start(): Promise<void> {
    await this.showForm();
  }

  currentView(): View {
    return this.view;
  }

  private setView(view: View): void {
    this.view = view;
    render(this.container, view, this.handlers, {
      allowNewLabels: this.allowNewLabels,
      exportUrlFor: (sessionId) => this.client.exportUrl(sessionId),
    });
  }

  private async showForm(error?: string): Promise<void> {
    this.sessionId = null;
    try {
      const health = await this.client.healthz();
      this.setView({ kind: 'form', corpora: health.corpora, error });
    } catch (problem) {
      this.setView({
        kind: 'failed',
        message: `service unreachable: ${describeProblem(problem)}`,
        corpora: {},
      });
    }
  }

  private async startSession(input: CreateSessionInput): Promise<void> {
    this.allowNewLabels = input.allow_new_labels ?? false;
    let summary;
    try {
      summary = await this.client.createSession(input);
    } catch (problem) {
      // Validation problems (unknown corpus, missing labels) stay inline.
      await this.showFormWithError(describeProblem(problem));
      return;
    }
    this.sessionId = summary.session_id;
    if (summary.status === 'pending') {
      this.setView({ kind: 'pending', sessionId: summary.session_id });
      await this.pollUntilReady(summary.session_id);
      return;
    }
    await this.refreshHead();
  }

  private async showFormWithError(error: string): Promise<void> {
    try {
      const health = await this.client.healthz();
      this.setView({ kind: 'form', corpora: health.corpora, error });
    } catch {
      this.setView({ kind: 'failed', message: error, corpora: {} });
    }
  }

  private async pollUntilReady(sessionId: string): Promise<void> {
    for (;;) {
      let summary;
      try {
        summary = await this.client.getSession(sessionId);
      } catch (problem) {
        this.setView({
          kind: 'failed',
          message: describeProblem(problem),
          corpora: {},
        });
        return;
      }
      if (summary.status === 'failed') {
        this.setView({
          kind: 'failed',
          message: summary.error ?? 'order construction failed',
          corpora: {},
        });
        return;
      }
      if (summary.status !== 'pending') {
        await this.refreshHead();
        return;
      }
      await sleep(PENDING_POLL_MS);
    }
  }

  private async refreshHead(notice?: string): Promise<void> {
    if (this.sessionId === null) {
      return;
    }
    try {
      const payload = await this.client.next(this.sessionId);
      this.setView(viewFromNext(this.sessionId, payload, notice));
    } catch (problem) {
      this.setView({
        kind: 'failed',
        message: describeProblem(problem),
        corpora: {},
      });
    }
  }

  private async submitLabel(label: string): Promise<void> {
    if (this.view.kind !== 'annotating' || this.sessionId === null) {
      return;
    }
    const docId = this.view.doc.id;
    try {
      await this.client.annotate(this.sessionId, docId, label);
    } catch (problem) {
      if (problem instanceof ApiError && problem.status === 409) {
        // Lost the race: refetch the authoritative head silently.
        await this.refreshHead();
        return;
      }
      if (problem instanceof ApiError) {
        await this.refreshHead(problem.message);
        return;
      }
      this.setView({
        kind: 'failed',
        message: describeProblem(problem),
        corpora: {},
      });
      return;
    }
    await this.refreshHead();
  }

  private onKeydown(event: KeyboardEvent): void {
    if (this.view.kind !== 'annotating' || shouldIgnoreKeyEvent(event.target)) {
      return;
    }
    const index = labelIndexForKey(event.key, this.view.progress.labels.length);
    if (index !== null) {
      void this.submitLabel(this.view.progress.labels[index]);
    }
  }
}

function describeProblem(problem: unknown): string {
  return problem instanceof Error ? problem.message : String(problem);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Create the app inside the container and show the start form. */
export async function boot(container: HTMLElement, client: Client): Promise<App> {
  const app = new App(container, client);
  await app.start();
  return app;
}

const mount = typeof document !== 'undefined'
  ? document.querySelector<HTMLElement>('[data-autoboot]')
  : null;
if (mount) {
  void boot(mount, new Client());
}
