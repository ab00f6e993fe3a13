import { describe, expect, it } from "vitest";

import { ApiClient, FetchLike } from "../src/api.js";
import { SessionController } from "../src/controller.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("controller error handling", () => {
  it("a stale stored session falls back to the start screen", async () => {
    const fetchFn: FetchLike = async () =>
      jsonResponse(404, { code: "UnknownSession", message: "unknown session" });
    const controller = new SessionController(new ApiClient("", fetchFn));
    await controller.resume("dead-session");
    expect(controller.current.screen).toBe("start");
    expect(controller.current.sessionId).toBeNull();
    expect(controller.current.error?.code).toBe("UnknownSession");
  });

  it("expiry mid-session fetches the summary", async () => {
    const summary = {
      session: "s", dataset: "d", split: "test", trials: 1, successes: 0,
      average_reward: 0, complete: true, per_trial: [],
    };
    const responses = [
      jsonResponse(410, { code: "SessionExpired", message: "over" }),
      jsonResponse(200, summary),
    ];
    const fetchFn: FetchLike = async () => responses.shift()!;
    const controller = new SessionController(new ApiClient("", fetchFn));
    // attach a live session id without a create round-trip
    // eslint-disable-next-line @typescript-eslint/no-explicit-any
    (controller as any).state = {
      ...controller.current, sessionId: "s", screen: "trial",
    };
    await controller.stop();
    expect(controller.current.screen).toBe("summary");
    expect(controller.current.summary).toEqual(summary);
  });

  it("drops concurrent actions while one is in flight", async () => {
    let calls = 0;
    const fetchFn: FetchLike = async () => {
      calls += 1;
      await new Promise((resolve) => setTimeout(resolve, 10));
      return jsonResponse(200, {
        type: "peek", trial_complete: false,
      });
    };
    const controller = new SessionController(new ApiClient("", fetchFn));
    // eslint-disable-next-line @typescript-eslint/no-explicit-any
    (controller as any).state = {
      ...controller.current, sessionId: "s", screen: "trial",
    };
    await Promise.all([controller.peek(0), controller.peek(1), controller.peek(2)]);
    expect(calls).toBe(1); // one in-flight request at a time
  });
});
