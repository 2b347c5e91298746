import { describe, expect, test } from "vitest";

import { StreamClient, StreamClientOptions } from "../src/connection.js";
import { ViewerState } from "../src/state.js";
import { FakeScheduler, FakeSocket, frameJson } from "./helpers.js";

function harness(opts: StreamClientOptions = {}) {
  const sockets: FakeSocket[] = [];
  const state = new ViewerState();
  const sched = new FakeScheduler();
  const banners: (string | null)[] = [];
  const frames: number[] = [];
  const client = new StreamClient(
    "ws://test/stream",
    state,
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    {
      scheduler: sched,
      onBanner: (t) => banners.push(t),
      onFrame: (m) => frames.push(m.seq),
      ...opts,
    },
  );
  return { sockets, state, sched, banners, frames, client };
}

describe("connect and feed", () => {
  test("open clears the banner and marks the state open", () => {
    const h = harness();
    h.client.start();
    expect(h.sockets.length).toBe(1);
    expect(h.state.status).toBe("connecting");
    h.sockets[0].emitOpen();
    expect(h.state.status).toBe("open");
    expect(h.banners).toEqual([null]);
  });

  test("frames flow into the state in order", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.sockets[0].emitMessage(frameJson(0));
    h.sockets[0].emitMessage(frameJson(1));
    expect(h.frames).toEqual([0, 1]);
    expect(h.state.lastSeq).toBe(1);
  });

  test("malformed frames are counted, never thrown", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.sockets[0].emitMessage("{broken");
    h.sockets[0].emitMessage(frameJson(7));
    h.sockets[0].emitMessage('{"seq": -3}');
    expect(h.state.parseErrors).toBe(2);
    expect(h.frames).toEqual([7]);
  });

  test("send is a no-op until the socket is open", () => {
    const h = harness();
    h.client.start();
    h.client.send({ animate_ms: 2.0 });
    expect(h.sockets[0].sent).toEqual([]);
    h.sockets[0].emitOpen();
    h.client.send({ animate_ms: 2.0 });
    expect(h.sockets[0].sent).toEqual(['{"animate_ms":2}']);
  });
});

describe("reconnect", () => {
  test("close schedules a retry and raises the banner", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.sockets[0].emitError();
    h.sockets[0].emitClose();
    expect(h.state.status).toBe("retrying");
    expect(h.banners[h.banners.length - 1]).toContain("retrying");
    expect(h.sched.delays).toEqual([250]);
    expect(h.sockets.length).toBe(1);
    h.sched.advance(250);
    expect(h.sockets.length).toBe(2);
  });

  test("an error followed by close books exactly one retry", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitError();
    h.sockets[0].emitClose();
    expect(h.sched.pending).toBe(1);
  });

  test("delays back off while the server stays down, then reset on success", () => {
    const h = harness();
    h.client.start();
    for (let i = 0; i < 5; i++) {
      h.sockets[h.sockets.length - 1].emitClose();
      h.sched.advance(10_000);
    }
    expect(h.sched.delays).toEqual([250, 500, 1000, 2000, 4000]);
    h.sockets[h.sockets.length - 1].emitOpen();
    h.sockets[h.sockets.length - 1].emitClose();
    expect(h.sched.delays[h.sched.delays.length - 1]).toBe(250);
  });

  test("a restarted server that numbers from zero is accepted cleanly", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.sockets[0].emitMessage(frameJson(299));
    h.sockets[0].emitClose();
    h.sched.advance(250);
    h.sockets[1].emitOpen();
    h.sockets[1].emitMessage(frameJson(0));
    expect(h.frames).toEqual([299, 0]);
    expect(h.state.staleDrops).toBe(0);
    expect(h.banners).toEqual([null, expect.stringContaining("retrying"), null]);
  });

  test("worst case reconnect inside the budget: four attempts under 5 s", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.sockets[0].emitClose();
    const t0 = h.sched.now;
    // server comes back just before the fourth attempt fires
    for (let i = 0; i < 3; i++) {
      h.sched.advance(h.sched.delays[h.sched.delays.length - 1]);
      h.sockets[h.sockets.length - 1].emitClose();
    }
    h.sched.advance(h.sched.delays[h.sched.delays.length - 1]);
    h.sockets[h.sockets.length - 1].emitOpen();
    expect(h.state.status).toBe("open");
    expect(h.sched.now - t0).toBeLessThan(5000);
  });
});

describe("stop", () => {
  test("stop cancels the pending retry", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitClose();
    expect(h.sched.pending).toBe(1);
    h.client.stop();
    expect(h.sched.pending).toBe(0);
    h.sched.advance(60_000);
    expect(h.sockets.length).toBe(1);
    expect(h.state.status).toBe("stopped");
  });

  test("stop closes the live socket and ignores its late close event", () => {
    const h = harness();
    h.client.start();
    h.sockets[0].emitOpen();
    h.client.stop();
    expect(h.sockets[0].closed).toBe(true);
    h.sockets[0].emitClose();
    expect(h.sched.pending).toBe(0);
    expect(h.state.status).toBe("stopped");
  });
});
