import type { ViewTab } from "./state.js";

/** Everything needed to reopen the app in the same place. Sending the URL
 * is the whole sharing story: model, saved analysis, share token, tab. */
export interface UrlState {
  model: string | null;
  analysis: string | null;
  token: string | null;
  tab: ViewTab;
}

const TABS: ViewTab[] = ["table", "graph", "charts", "code", "diff"];

export function encodeUrlState(state: UrlState): string {
  const q = new URLSearchParams();
  if (state.analysis) q.set("analysis", state.analysis);
  if (state.token) q.set("t", state.token);
  if (state.tab !== "table") q.set("tab", state.tab);
  const query = q.toString();
  const path = state.model ? `/m/${state.model}` : "/";
  return query ? `${path}?${query}` : path;
}

export function decodeUrlState(pathname: string, search: string): UrlState {
  const m = /^\/m\/([A-Za-z0-9]+)/.exec(pathname);
  const q = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const tab = q.get("tab");
  return {
    model: m ? m[1]! : null,
    analysis: q.get("analysis"),
    token: q.get("t"),
    tab: tab && (TABS as string[]).includes(tab) ? (tab as ViewTab) : "table",
  };
}
