import init, { eigen, check, mollify, exampleProblem } from "./pkg/annulus_demo.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x === null || x === undefined ? "-" : Number(x).toPrecision(6));

function show(el, text, isError = false) {
  el.textContent = text;
  el.classList.toggle("error", isError);
}

// Draws each series as a polyline over the shared t grid.
function plot(canvas, t, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.y);
  let lo = Math.min(0, ...all);
  let hi = Math.max(...all);
  if (hi === lo) hi = lo + 1;
  const pad = 12;
  const x = (v) => pad + ((v - t[0]) / (t[t.length - 1] - t[0])) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(pad, y(0));
  ctx.lineTo(w - pad, y(0));
  ctx.stroke();
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.y.forEach((v, j) => (j ? ctx.lineTo(x(t[j]), y(v)) : ctx.moveTo(x(t[j]), y(v))));
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - 90, 16 + 14 * k);
  });
}

function runEigen(ev) {
  ev?.preventDefault();
  const f = $("eigen-form").elements;
  try {
    const r = JSON.parse(eigen(f.kernel.value, f.full.checked, +f.a.value, +f.b.value, +f.nodes.value));
    show(
      $("eigen-out"),
      `${r.operator}\n` +
        `mu (Nystrom)       ${fmt(r.mu_numeric)}\n` +
        `mu (shooting)      ${fmt(r.mu_shooting)}\n` +
        `pi^2/(b-a)^2 ref.  ${fmt(r.mu_closed_form)}\n` +
        `residual           ${Number(r.residual).toExponential(1)}`
    );
    plot($("eigen-plot"), r.t, [{ y: r.phi, color: "#1f5fa8", label: "eigenfunction" }]);
  } catch (e) {
    show($("eigen-out"), String(e), true);
  }
}

function runCheck() {
  try {
    const r = JSON.parse(check($("problem").value));
    const lines = r.lines.map(
      (l) => `${l.id.padEnd(5)} ${fmt(l.left).padStart(10)} ${l.relation} ${fmt(l.right).padEnd(10)} ${l.pass ? "PASS" : "FAIL"}`
    );
    const pre = r.preconditions.map((p) => `precondition ${p.description}: ${p.pass ? "PASS" : "FAIL"}`);
    show($("check-out"), [...pre, ...lines, "", `verdict: ${r.verdict ? "PASS" : "FAIL"}. ${r.conclusion}`].join("\n"));
  } catch (e) {
    show($("check-out"), String(e), true);
  }
}

function runMollify() {
  const f = $("mollify-form").elements;
  f.shown.value = f.n.value;
  try {
    const r = JSON.parse(mollify(f.kernel.value, +f.n.value));
    show(
      $("mollify-out"),
      `n = ${r.n}\nsup error              ${fmt(r.sup_error)}\nweighted deriv. error  ${fmt(r.weighted_deriv_error)}`
    );
    plot($("mollify-plot"), r.t, [
      { y: r.w, color: "#999", label: "sqrt(t)" },
      { y: r.w_n, color: "#c0392b", label: "mollified" },
    ]);
  } catch (e) {
    show($("mollify-out"), String(e), true);
  }
}

await init();
show($("status"), "Ready.");
$("problem").value = exampleProblem();
$("eigen-form").addEventListener("submit", runEigen);
$("check-run").addEventListener("click", runCheck);
$("mollify-form").addEventListener("input", runMollify);
runEigen();
runMollify();
