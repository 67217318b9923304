/** In-memory fetch double for the service API. */
import type { FetchLike } from "../src/api.js";

export interface Route {
  method: string;
  path: RegExp;
  handler: (body: unknown, match: RegExpMatchArray) => { status?: number; body: unknown };
}

export function fakeFetch(routes: Route[], log: { method: string; path: string; body: unknown }[] = []): FetchLike {
  return async (input: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://test");
    const path = url.pathname + url.search;
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    log.push({ method, path, body });
    for (const route of routes) {
      const match = path.match(route.path);
      if (route.method === method && match) {
        const result = route.handler(body, match);
        return new Response(JSON.stringify(result.body), {
          status: result.status ?? 200,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(
      JSON.stringify({ code: "not_found", message: `no route ${method} ${path}` }),
      { status: 404, headers: { "Content-Type": "application/json" } },
    );
  };
}

export function networkFailure(): FetchLike {
  return async () => {
    throw new TypeError("fetch failed");
  };
}
