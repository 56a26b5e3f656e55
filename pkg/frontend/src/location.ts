/** Location answers rendered as an image with a rectangle overlay. */

import type { LocationAnswer } from "./types.js";

export class LocationPanel {
  constructor(
    private readonly root: HTMLElement,
    private readonly resolve: (path: string) => string = (path) => path,
  ) {
    root.classList.add("location-panel");
  }

  show(answer: LocationAnswer): void {
    this.root.textContent = "";
    const figure = document.createElement("figure");
    figure.className = "location";
    const frame = document.createElement("div");
    frame.className = "location-frame";
    if (answer.url) {
      const image = document.createElement("img");
      image.src = this.resolve(answer.url);
      image.alt = answer.caption ?? answer.instance;
      frame.appendChild(image);
    }
    const box = document.createElement("div");
    box.className = "location-box";
    box.style.left = `${answer.rectangle.x}px`;
    box.style.top = `${answer.rectangle.y}px`;
    box.style.width = `${answer.rectangle.w}px`;
    box.style.height = `${answer.rectangle.h}px`;
    frame.appendChild(box);
    figure.appendChild(frame);
    if (answer.caption) {
      const caption = document.createElement("figcaption");
      caption.textContent = answer.caption;
      figure.appendChild(caption);
    }
    this.root.appendChild(figure);
  }

  showNotice(message: string): void {
    this.root.textContent = "";
    const notice = document.createElement("p");
    notice.className = "notice";
    notice.textContent = message;
    this.root.appendChild(notice);
  }

  clear(): void {
    this.root.textContent = "";
  }
}
