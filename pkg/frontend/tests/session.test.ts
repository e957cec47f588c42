import { describe, expect, it } from 'vitest';

import { ServiceClient } from '../src/api';
import { SessionDriver } from '../src/session';
import { MockService } from './mockService';

function makeDriver() {
  const service = new MockService();
  return { service, driver: new SessionDriver(new ServiceClient('http://test', service.fetch)) };
}

describe('SessionDriver', () => {
  it('completes a full session with exactly T answer submissions', async () => {
    const T = 20;
    const { service, driver } = makeDriver();
    await driver.start({ budget_t: T });
    for (let t = 0; t < T; t++) {
      expect(await driver.answer(t % 2 === 0 ? 1 : 0)).toBe(true);
    }
    const { view } = driver.state();
    expect(view?.state).toBe('completed');
    expect(view?.result?.final_policy).toBeDefined();
    expect(driver.submissions).toBe(T);
    expect(service.answerPosts).toBe(T);
  });

  it('ignores answers while a request is in flight', async () => {
    const { service, driver } = makeDriver();
    await driver.start({ budget_t: 5 });
    const first = driver.answer(1);
    const second = driver.answer(0); // fired before the first resolves
    expect(await second).toBe(false);
    expect(await first).toBe(true);
    expect(service.answerPosts).toBe(1);
    expect(driver.state().view?.progress.answered).toBe(1);
  });

  it('ignores answers when the session is completed', async () => {
    const { service, driver } = makeDriver();
    await driver.start({ budget_t: 1 });
    await driver.answer(1);
    expect(await driver.answer(0)).toBe(false);
    expect(service.answerPosts).toBe(1);
  });

  it('keeps the round and offers retry after a server failure', async () => {
    const { service, driver } = makeDriver();
    await driver.start({ budget_t: 3 });
    service.failNextAnswer = true;
    expect(await driver.answer(1)).toBe(false);
    expect(driver.state().lastError).toContain('injected failure');
    expect(driver.state().view?.query?.round).toBe(1);
    expect(await driver.retry()).toBe(true);
    expect(driver.state().lastError).toBeNull();
    expect(driver.state().view?.progress.answered).toBe(1);
  });

  it('retry without a failed answer is a no-op', async () => {
    const { service, driver } = makeDriver();
    await driver.start({ budget_t: 2 });
    expect(await driver.retry()).toBe(false);
    expect(service.answerPosts).toBe(0);
  });

  it('refreshes to server state on a stale round conflict', async () => {
    const { service, driver } = makeDriver();
    const view = await driver.start({ budget_t: 3 });
    // Another client answers round 1 and 2 behind this tab's back.
    await service.fetch('http://test/sessions/' + view.session_id + '/answers', {
      method: 'POST',
      body: JSON.stringify({ round: 1, answer: 1 }),
    });
    await service.fetch('http://test/sessions/' + view.session_id + '/answers', {
      method: 'POST',
      body: JSON.stringify({ round: 2, answer: 0 }),
    });
    // This tab still shows round 1; its submission replays idempotently.
    await driver.answer(1);
    expect(driver.state().view?.query?.round).toBe(3);
    expect(driver.state().lastError).toBeNull();
  });

  it('resumes an existing session by id', async () => {
    const { service, driver } = makeDriver();
    const view = await driver.start({ budget_t: 4 });
    await driver.answer(1);
    const other = new SessionDriver(new ServiceClient('http://test', service.fetch));
    const resumed = await other.resume(view.session_id);
    expect(resumed.progress.answered).toBe(1);
    expect(resumed.query?.round).toBe(2);
  });

  it('notifies listeners on state changes', async () => {
    const { driver } = makeDriver();
    const states: boolean[] = [];
    driver.onChange((s) => states.push(s.busy));
    await driver.start({ budget_t: 2 });
    await driver.answer(1);
    // busy toggles on around the answer request and off after it resolves.
    expect(states).toContain(true);
    expect(states[states.length - 1]).toBe(false);
  });
});
