// Browser bootstrap: ties the app shell to the real document, the real
// fetch, and the address hash for deep links.

import { ApiClient } from './api.js';
import { formatHash, parseHash } from './state.js';
import { App } from './ui.js';

function mountOrDie(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function numberOrNull(value: string): number | null {
  const n = Number(value);
  return value.trim() !== '' && Number.isFinite(n) ? n : null;
}

const base = new URLSearchParams(location.search).get('api') ?? '';
const api = new ApiClient(base, (url, init) => fetch(url, init));

const app = new App({
  api,
  doc: document,
  mounts: {
    gallery: mountOrDie('gallery'),
    runs: mountOrDie('runs'),
    status: mountOrDie('status'),
    info: mountOrDie('info'),
  },
  thumbUrl: (i) => api.thumbUrl(i),
  schedule: (cb, ms) => {
    const id = window.setInterval(cb, ms);
    return () => window.clearInterval(id);
  },
  onStateChange: (state) => {
    const hash = formatHash(state);
    if (hash && hash !== location.hash) history.replaceState(null, '', hash);
  },
});

const temperature = mountOrDie('temperature') as HTMLInputElement;
const noCd = mountOrDie('no-cd') as HTMLInputElement;
const noCt = mountOrDie('no-ct') as HTMLInputElement;
const maxLength = mountOrDie('max-length') as HTMLInputElement;

function readPanel(): void {
  app.setPanel({
    temperature: numberOrNull(temperature.value) ?? 1.0,
    disableCd: noCd.checked,
    disableCt: noCt.checked,
    maxLength: numberOrNull(maxLength.value),
  });
}

for (const input of [temperature, noCd, noCt, maxLength]) {
  input.addEventListener('change', readPanel);
}
mountOrDie('run-button').addEventListener('click', () => {
  readPanel();
  void app.run();
});

void (async () => {
  await app.load();
  const linked = parseHash(location.hash);
  if (linked.start !== null) await app.pick(linked.start);
  if (linked.run !== null) await app.restoreRun(linked.run);
})();
