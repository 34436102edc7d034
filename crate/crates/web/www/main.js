import init, { assign, decompose, solve } from "./pkg/lottery_web.js";

const $ = (id) => document.getElementById(id);

function lowerFamily(k) {
  const objects = [{ id: "o1", capacity: k }];
  for (let j = 2; j <= k + 1; j++) objects.push({ id: `o${j}`, capacity: 1 });
  const all = objects.map((o) => o.id);
  const agents = [];
  for (let i = 1; i <= k * k; i++) agents.push({ id: `${i}`, prefs: i <= k ? all : ["o1"] });
  return { objects, agents };
}

function upperFamily(l) {
  const objects = [{ id: "o1", capacity: l }, { id: "o2", capacity: l }];
  const agents = [];
  for (let i = 1; i <= l * l; i++) agents.push({ id: `${i}`, prefs: i <= l ? ["o1", "o2"] : ["o1"] });
  return { objects, agents };
}

const PRESETS = {
  lb2: lowerFamily(2),
  ub3: upperFamily(3),
  school: {
    objects: [
      { id: "north", capacity: 2 },
      { id: "south", capacity: 1 },
      { id: "east", capacity: 2 },
    ],
    agents: [
      { id: "ana", prefs: ["north", "south"] },
      { id: "ben", prefs: ["north", "east"] },
      { id: "cai", prefs: ["south", "north"] },
      { id: "dee", prefs: ["north"] },
      { id: "eli", prefs: ["east", "south", "north"] },
      { id: "fay", prefs: ["south"] },
    ],
  },
};

let assignment = null;

function showError(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function run(f) {
  showError(null);
  try {
    f();
  } catch (e) {
    showError(e);
  }
}

function el(tag, text) {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  return node;
}

function table(header, rows) {
  const t = el("table");
  const head = el("tr");
  header.forEach((h) => head.appendChild(el("th", h)));
  t.appendChild(head);
  rows.forEach((r) => {
    const tr = el("tr");
    r.forEach((c) => tr.appendChild(el("td", c)));
    t.appendChild(tr);
  });
  return t;
}

function matrixTable(m) {
  return table(["agent", ...m.objects], m.agents.map((a, i) => [a, ...m.rows[i]]));
}

function termsTable(d) {
  return table(
    ["weight", "assigned", "matching"],
    d.terms.map((t) => [
      t.weight,
      String(t.cardinality),
      Object.entries(t.assignment)
        .filter(([, o]) => o !== null)
        .map(([a, o]) => `${a}→${o}`)
        .join(" "),
    ]),
  );
}

function fill(id, ...nodes) {
  $(id).replaceChildren(...nodes);
}

function mechanism(name) {
  run(() => {
    const out = JSON.parse(assign($("instance").value, name, 0n));
    assignment = out.assignment;
    const how = out.mechanism === "ps" ? "probabilistic serial" : out.exact ? `exact over ${out.orderings} orderings` : `${out.orderings} sampled orderings`;
    fill(
      "assignment-out",
      el("p", `${how}; expected number assigned μ = ${out.mu} (${out.mu_value.toFixed(3)})`),
      matrixTable(out.assignment),
    );
    fill("decompose-out");
    fill("solve-out");
  });
}

function current() {
  if (!assignment) throw new Error("compute an assignment first");
  return JSON.stringify(assignment);
}

$("rsd").onclick = () => mechanism("rsd");
$("ps").onclick = () => mechanism("ps");

$("decompose").onclick = () =>
  run(() => {
    const out = JSON.parse(decompose($("instance").value, current()));
    fill("decompose-out", el("p", `worst case ${out.worst_case} assigned (μ = ${out.mu})`), termsTable(out.decomposition));
  });

$("solve").onclick = () =>
  run(() => {
    const out = JSON.parse(solve($("instance").value, current(), $("framework").value, 0n));
    const summary =
      out.status === "optimal"
        ? `z = ${out.z} (efficient matchings assign between ${out.p_min} and ${out.p_max}; ⌊μ⌋ = ${out.floor_mu})`
        : `${out.status}: z in [${out.z}, ${out.upper})`;
    fill("solve-out", el("p", summary), ...(out.decomposition ? [termsTable(out.decomposition)] : []));
  });

$("preset").onchange = () => {
  $("instance").value = JSON.stringify(PRESETS[$("preset").value], null, 2);
  assignment = null;
  fill("assignment-out");
  fill("decompose-out");
  fill("solve-out");
};

await init();
$("preset").onchange();
