/** Small DOM-driving helpers for scripted sessions. */

export function $(root: HTMLElement, selector: string): HTMLElement {
  const node = root.querySelector<HTMLElement>(selector);
  if (!node) {
    throw new Error(`no element matches ${selector}`);
  }
  return node;
}

export function click(root: HTMLElement, selector: string): void {
  $(root, selector).dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function type(root: HTMLElement, selector: string, value: string): void {
  const input = $(root, selector) as HTMLInputElement | HTMLTextAreaElement;
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

export async function waitFor(
  probe: () => boolean,
  what = "condition",
  timeoutMs = 5_000,
): Promise<void> {
  const start = Date.now();
  while (!probe()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

export function mountRoot(): HTMLElement {
  const root = document.createElement("div");
  document.body.append(root);
  return root;
}
