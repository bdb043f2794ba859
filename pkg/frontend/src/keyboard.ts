/**
 * Keyboard shortcuts: digits 1..9 pick the corresponding label button.
 */

/** Index of the label a digit key selects, or null if the key is not bound. */
export function labelIndexForKey(
  key: string,
  labelCount: number,
): number | null {
  if (!/^[1-9]$/.test(key)) {
    return null;
  }
  const index = Number(key) - 1;
  return index < labelCount ? index : null;
}

/** True when the event originates from a text field and must be ignored. */
export function shouldIgnoreKeyEvent(target: EventTarget | null): boolean {
  if (!(target instanceof HTMLElement)) {
    return false;
  }
  const tag = target.tagName.toLowerCase();
  if (tag === 'input' || tag === 'textarea') {
    return true;
  }
  const editable = target.getAttribute('contenteditable');
  return editable === '' || editable === 'true' || target.isContentEditable === true;
}
