/**
 * DOM rendering: one function per screen, innerHTML templates plus
 * listener attachment, no client-side counting (all numbers come from
 * the server's progress payload).
 */

import type { CreateSessionInput } from './api.js';
import type { View } from './state.js';
import {
  formatTheta,
  parseLabelsInput,
  progressBarText,
  progressRows,
} from './state.js';

export interface Handlers {
  onStart(input: CreateSessionInput): void;
  onLabel(label: string): void;
  onReset(): void;
}

export interface RenderOptions {
  allowNewLabels: boolean;
  exportUrlFor(sessionId: string): string;
}

const METHODS = ['random', 'rss', 'oc', 'lls'];

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function progressSection(view: View & { kind: 'annotating' | 'finished' }): string {
  const rows = progressRows(view.progress)
    .map(
      (row) => `
      <li class="progress-row" data-label="${escapeHtml(row.label)}">
        <span class="progress-label">${escapeHtml(row.label)}</span>
        <span class="progress-bar">${progressBarText(row.fraction)}</span>
        <span class="progress-count">${row.count}/${row.target}</span>
      </li>`,
    )
    .join('');
  return `
    <ul id="progress-list">${rows}</ul>
    <p id="theta-live">θ so far: <strong>${formatTheta(
      view.progress.theta_so_far,
    )}</strong></p>`;
}

function renderForm(
  container: HTMLElement,
  view: View & { kind: 'form' },
  handlers: Handlers,
): void {
  const corpora = Object.keys(view.corpora);
  const corpusOptions = corpora
    .map((name) => `<option value="${escapeHtml(name)}">${escapeHtml(name)}</option>`)
    .join('');
  const methodOptions = METHODS.map(
    (method) => `<option value="${method}">${method}</option>`,
  ).join('');
  container.innerHTML = `
    <form id="start-form">
      <h1>Start an annotation session</h1>
      <label>Corpus
        <select id="corpus-input">${corpusOptions}</select>
      </label>
      <label>Method
        <select id="method-input">${methodOptions}</select>
      </label>
      <label>n_shots
        <input id="nshots-input" type="number" min="1" value="8" />
      </label>
      <label>Labels (comma-separated; leave empty to use the corpus labels)
        <input id="labels-input" type="text" value="" />
      </label>
      <label>Seed
        <input id="seed-input" type="number" value="0" />
      </label>
      <label>
        <input id="allow-new-input" type="checkbox" />
        Allow new labels during annotation
      </label>
      <button id="start-button" type="submit">Start</button>
      <p id="form-error" class="error">${view.error ? escapeHtml(view.error) : ''}</p>
    </form>`;
  const form = container.querySelector<HTMLFormElement>('#start-form')!;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const value = (id: string) =>
      container.querySelector<HTMLInputElement>(id)!.value;
    handlers.onStart({
      corpus: container.querySelector<HTMLSelectElement>('#corpus-input')!.value,
      method: container.querySelector<HTMLSelectElement>('#method-input')!.value,
      n_shots: Number(value('#nshots-input')),
      labels: parseLabelsInput(value('#labels-input')),
      seed: Number(value('#seed-input')),
      allow_new_labels:
        container.querySelector<HTMLInputElement>('#allow-new-input')!.checked,
    });
  });
}

function renderPending(container: HTMLElement): void {
  container.innerHTML = `
    <section id="pending-banner">
      <h1>Preparing the selection order…</h1>
      <p>Large corpora rank in the background; this page polls until ready.</p>
    </section>`;
}

function renderAnnotating(
  container: HTMLElement,
  view: View & { kind: 'annotating' },
  handlers: Handlers,
  options: RenderOptions,
): void {
  const labels = view.progress.labels;
  const buttons = labels
    .map((label, index) => {
      const hint = index < 9 ? `<kbd>${index + 1}</kbd> ` : '';
      return `<button class="label-button" data-label="${escapeHtml(label)}">
        ${hint}${escapeHtml(label)}
      </button>`;
    })
    .join('');
  const newLabelEntry = options.allowNewLabels
    ? `
      <form id="new-label-form">
        <input id="new-label-input" type="text" placeholder="new label" />
        <button id="new-label-button" type="submit">Add label</button>
      </form>`
    : '';
  container.innerHTML = `
    <section id="annotating">
      <p id="status-banner">
        ${escapeHtml(view.progress.method)} session —
        ${view.progress.total_annotations} annotated,
        rank ${view.doc.rank} of ${view.progress.n_ranked}
      </p>
      <p id="notice" class="notice">${view.notice ? escapeHtml(view.notice) : ''}</p>
      <article id="document-card">
        <header id="document-id">${escapeHtml(view.doc.id)}</header>
        <p id="document-text">${escapeHtml(view.doc.text)}</p>
      </article>
      <div id="label-buttons">${buttons}</div>
      ${newLabelEntry}
      ${progressSection(view)}
      <p><a id="export-link" href="${options.exportUrlFor(view.sessionId)}" download>
        Download export
      </a></p>
    </section>`;
  for (const button of container.querySelectorAll<HTMLButtonElement>('.label-button')) {
    button.addEventListener('click', () => {
      handlers.onLabel(button.dataset.label!);
    });
  }
  const newLabelForm = container.querySelector<HTMLFormElement>('#new-label-form');
  if (newLabelForm) {
    newLabelForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const input = container.querySelector<HTMLInputElement>('#new-label-input')!;
      const label = input.value.trim();
      if (label) {
        input.value = '';
        handlers.onLabel(label);
      }
    });
  }
}

function renderFinished(
  container: HTMLElement,
  view: View & { kind: 'finished' },
  handlers: Handlers,
  options: RenderOptions,
): void {
  container.innerHTML = `
    <section id="finished">
      <h1 id="final-status">Session ${escapeHtml(view.status)}</h1>
      <p id="final-theta">Overannotation rate θ = <strong>${formatTheta(
        view.theta,
      )}</strong></p>
      ${progressSection(view)}
      <p><a id="export-link" href="${options.exportUrlFor(view.sessionId)}" download>
        Download export
      </a></p>
      <button id="restart-button">Start another session</button>
    </section>`;
  container
    .querySelector<HTMLButtonElement>('#restart-button')!
    .addEventListener('click', () => handlers.onReset());
}

function renderFailed(
  container: HTMLElement,
  view: View & { kind: 'failed' },
  handlers: Handlers,
): void {
  container.innerHTML = `
    <section id="failed">
      <h1>Session failed</h1>
      <p id="failure-message" class="error">${escapeHtml(view.message)}</p>
      <button id="restart-button">Back to the start form</button>
    </section>`;
  container
    .querySelector<HTMLButtonElement>('#restart-button')!
    .addEventListener('click', () => handlers.onReset());
}

/** Render the view into the container, replacing whatever was there. */
export function render(
  container: HTMLElement,
  view: View,
  handlers: Handlers,
  options: RenderOptions,
): void {
  switch (view.kind) {
    case 'form':
      renderForm(container, view, handlers);
      break;
    case 'pending':
      renderPending(container);
      break;
    case 'annotating':
      renderAnnotating(container, view, handlers, options);
      break;
    case 'finished':
      renderFinished(container, view, handlers, options);
      break;
    case 'failed':
      renderFailed(container, view, handlers);
      break;
  }
}
