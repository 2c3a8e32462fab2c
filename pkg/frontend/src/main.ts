import { GridforgeApp } from "./app.js";
import { GridforgeClient } from "./api.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? "http://127.0.0.1:8877";

const root = document.getElementById("root");
if (!root) throw new Error("missing #root");

const app = new GridforgeApp(root, new GridforgeClient(server));

// Handy for poking at the app from the devtools console.
(window as unknown as { gridforge: GridforgeApp }).gridforge = app;
