import { describe, expect, it } from "vitest";

import { ApiError, AttemptResponse, CfgeqClient } from "../src/api.js";

function fakeFetch(
  handler: (input: string, init?: RequestInit) => { status: number; body: unknown },
) {
  const calls: { input: string; init?: RequestInit }[] = [];
  const impl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push({ input, init });
    const { status, body } = handler(input, init);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    } as Response;
  };
  return { impl, calls };
}

describe("CfgeqClient", () => {
  it("submits attempts as the text format and parses the verdict", async () => {
    const response: AttemptResponse = {
      verdict: "not_equivalent",
      method: "counterexample",
      cache_tier: "none",
      explanation: { counterexample: { word: "abb", side: "only_in_left" } },
    };
    const { impl, calls } = fakeFetch(() => ({ status: 200, body: response }));
    const client = new CfgeqClient("http://svc", impl);
    const got = await client.submitAttempt("intro", "S -> a S b | a b b");
    expect(got.verdict).toBe("not_equivalent");
    expect(calls[0].input).toBe("http://svc/exercises/intro/attempts");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ grammar: "S -> a S b | a b b" });
  });

  it("raises ApiError with the server detail", async () => {
    const { impl } = fakeFetch(() => ({
      status: 422,
      body: { detail: "line 1, column 1: rule has no '->'" },
    }));
    const client = new CfgeqClient("", impl);
    await expect(client.submitAttempt("intro", "nonsense")).rejects.toThrowError(ApiError);
    await expect(client.submitAttempt("intro", "nonsense")).rejects.toThrow(/line 1/);
  });

  it("posts manual classifications with a rationale", async () => {
    const { impl, calls } = fakeFetch(() => ({ status: 200, body: { cached_keys: 3 } }));
    const client = new CfgeqClient("", impl);
    const result = await client.classifyCluster("intro:abc", "equivalent", "checked by hand");
    expect(result.cached_keys).toBe(3);
    expect(calls[0].input).toBe("/clusters/intro%3Aabc/classification");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      verdict: "equivalent",
      rationale: "checked by hand",
    });
  });
});
