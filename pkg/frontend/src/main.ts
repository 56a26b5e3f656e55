/** Browser entry point; reads the service origin from <meta name="api-base">. */

import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const meta = document.querySelector<HTMLMetaElement>('meta[name="api-base"]');
  const app = createApp({ root, base: meta?.content ?? "" });
  void app.start();
}
