// DOM wiring: one active session per tab, A/R keyboard shortcuts, and a
// retry button when an answer fails in transit.

import { ServiceClient } from './api';
import { SessionDriver } from './session';
import { renderSession } from './ui';

export function mountConsole(root: HTMLElement, baseUrl: string): SessionDriver {
  const driver = new SessionDriver(new ServiceClient(baseUrl));

  const render = () => {
    const { view, busy, lastError } = driver.state();
    root.innerHTML = view
      ? renderSession(view, busy, lastError)
      : '<p class="loading">starting session&hellip;</p>';
  };

  driver.onChange(render);
  render();

  root.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (target.id === 'retry') {
      void driver.retry();
      return;
    }
    const answer = target.getAttribute('data-answer');
    if (answer === '0' || answer === '1') {
      void driver.answer(answer === '1' ? 1 : 0);
    }
  });

  document.addEventListener('keydown', (event) => {
    if (event.key === 'a' || event.key === 'A') void driver.answer(1);
    if (event.key === 'r' || event.key === 'R') void driver.answer(0);
  });

  const params = new URLSearchParams(window.location.search);
  const existing = params.get('session');
  if (existing) {
    void driver.resume(existing);
  } else {
    void driver.start({ budget_t: Number(params.get('T') ?? 20) });
  }
  return driver;
}

if (typeof document !== 'undefined') {
  const root = document.getElementById('console');
  if (root) {
    mountConsole(root, (root.getAttribute('data-service-url') ?? '').replace(/\/$/, ''));
  }
}
