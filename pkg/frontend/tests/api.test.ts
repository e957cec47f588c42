import { describe, expect, it } from 'vitest';

import { ApiError, ServiceClient } from '../src/api';
import { MockService } from './mockService';

function makeClient() {
  const service = new MockService();
  return { service, client: new ServiceClient('http://test', service.fetch) };
}

describe('ServiceClient', () => {
  it('lists problems', async () => {
    const { client } = makeClient();
    expect(await client.listProblems()).toEqual({ problems: ['zdt1'] });
  });

  it('creates a session and returns the first query', async () => {
    const { client } = makeClient();
    const view = await client.createSession({ budget_t: 3 });
    expect(view.state).toBe('awaiting_answer');
    expect(view.query?.round).toBe(1);
    expect(view.progress).toEqual({ answered: 0, total: 3 });
  });

  it('advances through rounds to completion', async () => {
    const { client } = makeClient();
    let view = await client.createSession({ budget_t: 2 });
    view = await client.submitAnswer(view.session_id, 1, 1);
    expect(view.query?.round).toBe(2);
    view = await client.submitAnswer(view.session_id, 2, 0);
    expect(view.state).toBe('completed');
    expect(view.result?.theta_hat).toHaveLength(2);
    expect(view.history).toHaveLength(2);
  });

  it('duplicate answers are idempotent', async () => {
    const { client } = makeClient();
    const view = await client.createSession({ budget_t: 3 });
    await client.submitAnswer(view.session_id, 1, 1);
    const dup = await client.submitAnswer(view.session_id, 1, 1);
    expect(dup.progress.answered).toBe(1);
    expect(dup.query?.round).toBe(2);
  });

  it('out-of-order rounds raise a 409 ApiError', async () => {
    const { client } = makeClient();
    const view = await client.createSession({ budget_t: 3 });
    await expect(client.submitAnswer(view.session_id, 3, 1)).rejects.toMatchObject({
      name: 'ApiError',
      status: 409,
    });
  });

  it('unknown session raises a 404 ApiError', async () => {
    const { client } = makeClient();
    try {
      await client.getSession('nope');
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(404);
      expect((err as ApiError).message).toBe('unknown session');
    }
  });
});
