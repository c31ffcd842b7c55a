// Browser entry point. Expects ?template=<cid> in the URL and a gateway
// on the same origin (or ?gateway=<base> for development).

import { GatewayClient } from "./api.js";
import { ConsentApp } from "./app.js";
import { loadOrCreateWallet } from "./wallet.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const templateCid = params.get("template");
  const base = params.get("gateway") ?? "";
  const container = document.getElementById("app");
  if (!container) throw new Error("missing #app container");
  if (!templateCid) {
    container.textContent = "No template cid given (?template=aic1...).";
    return;
  }
  const wallet = loadOrCreateWallet(window.localStorage);
  const client = new GatewayClient(base);
  await client.login("SUBJECT", wallet.address);
  const app = new ConsentApp(container, client, wallet);
  await app.start(templateCid);
}

void boot();
