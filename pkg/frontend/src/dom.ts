/** Tiny DOM helpers that also work under headless test environments. */

export function option(doc: Document, text: string, value: string): HTMLOptionElement {
  const node = doc.createElement('option');
  node.textContent = text;
  node.value = value;
  return node;
}
