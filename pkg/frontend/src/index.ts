export * from "./csv.js";
export * from "./scale.js";
export * from "./svg.js";
export * from "./figures.js";
export { runCli } from "./cli.js";
