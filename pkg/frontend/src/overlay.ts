/**
 * Mask overlay: the original photo with the server-rendered mask stacked on
 * top at adjustable opacity. Accepted pixels are white in the mask PNG and
 * pass the photo through; discarded pixels get a red tint via CSS blending.
 */

export function renderMaskOverlay(
  container: HTMLElement,
  imageUrl: string | null,
  maskUrl: string | null,
  opacity: number,
): void {
  container.textContent = "";
  container.classList.add("mask-overlay");
  if (!imageUrl) {
    const empty = document.createElement("div");
    empty.className = "overlay-empty";
    empty.textContent = "no image loaded";
    container.appendChild(empty);
    return;
  }
  const base = document.createElement("img");
  base.className = "overlay-base";
  base.src = imageUrl;
  container.appendChild(base);
  if (maskUrl) {
    const mask = document.createElement("img");
    mask.className = "overlay-mask discarded-tint";
    mask.src = maskUrl;
    mask.style.opacity = String(opacity);
    container.appendChild(mask);
  }
}

export function setOverlayOpacity(container: HTMLElement, opacity: number): void {
  const mask = container.querySelector<HTMLImageElement>(".overlay-mask");
  if (mask) mask.style.opacity = String(opacity);
}
