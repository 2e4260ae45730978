// @vitest-environment jsdom
//
// Dashboard acceptance: a mocked 10-highlight payload renders in server
// order, player/hole filters follow the service's query semantics, and a
// forbidden review action surfaces IllegalTransition — all against the
// stubbed API, no live service.
import { beforeEach, describe, expect, it } from "vitest";

import { CuratorClient } from "../src/api.js";
import { render } from "../src/render.js";
import { FeedStore } from "../src/store.js";
import { StubService, makeFeed, makeRecord } from "./fixtures";

function wire(service: StubService) {
  const container = document.getElementById("app")!;
  const store = new FeedStore(new CuratorClient("http://stub", service.fetch), 10);
  store.subscribe((state) =>
    render(container, state, {
      onFilter: (filter) => void store.setFilter(filter),
      onReview: (id, status) => void store.review(id, status),
    }),
  );
  return { container, store };
}

function cardIds(container: HTMLElement): (string | null)[] {
  return [...container.querySelectorAll(".card")].map((c) => c.getAttribute("data-id"));
}

describe("dashboard against a stubbed API", () => {
  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
  });

  it("renders the mocked 10-highlight payload in server order", async () => {
    const feed = makeFeed(10);
    const { container, store } = wire(new StubService(feed));
    await store.refresh();
    expect(cardIds(container)).toEqual(feed.map((r) => r.id));
  });

  it("applies player and hole filters with the service's semantics", async () => {
    const feed = makeFeed(10);
    const service = new StubService(feed);
    const { container, store } = wire(service);
    await store.refresh();

    const target = feed[2];
    await store.setFilter({ player: target.player!, hole: target.hole! });
    const expected = feed
      .filter((r) => r.player === target.player && r.hole === target.hole)
      .map((r) => r.id);
    expect(cardIds(container)).toEqual(expected);
    expect(expected.length).toBeGreaterThan(0);

    const last = new URL(service.requests.at(-1)!);
    expect(last.searchParams.get("player")).toBe(target.player);
    expect(last.searchParams.get("hole")).toBe(String(target.hole));

    await store.setFilter({});
    expect(cardIds(container)).toHaveLength(10);
  });

  it("surfaces IllegalTransition on a forbidden review action and reverts", async () => {
    const rejected = makeRecord(0, { review_status: "rejected" });
    const { container, store } = wire(new StubService([rejected]));
    await store.refresh();

    (container.querySelector(".action-published") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0)); // let the POST settle

    const toast = container.querySelector(".toast.error");
    expect(toast).not.toBeNull();
    expect(toast!.textContent).toBe(
      `cannot move ${rejected.id} from 'rejected' to 'published'`);
    expect(container.querySelector(".badge")!.textContent).toBe("rejected");
  });

  it("legal review actions round-trip and the badge matches the server", async () => {
    const { container, store } = wire(new StubService([makeRecord(0)]));
    await store.refresh();
    (container.querySelector(".action-reviewed") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(container.querySelector(".badge")!.textContent).toBe("reviewed");
    expect(container.querySelector(".toast.error")).toBeNull();
  });
});
