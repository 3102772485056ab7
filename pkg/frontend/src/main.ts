import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  void app.boot();

  const uploader = document.getElementById("upload") as HTMLInputElement | null;
  uploader?.addEventListener("change", () => {
    const file = uploader.files?.[0];
    if (file) void app.upload(file);
  });

  const tabs = document.getElementById("tabs");
  tabs?.addEventListener("click", (ev) => {
    const tab = (ev.target as HTMLElement).dataset.tab;
    if (tab) app.store.setTab(tab as never);
  });

  document.getElementById("save")?.addEventListener("click", () => {
    const name = prompt("Analysis name");
    if (name) void app.saveAnalysis(name);
  });

  document.getElementById("share")?.addEventListener("click", async () => {
    const url = await app.shareLink();
    if (url) await navigator.clipboard.writeText(location.origin + url);
  });
}
