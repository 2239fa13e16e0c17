import init, { limitCurve, simulate, fitCsv } from "./pkg/sandwich_lab_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (v, d = 4) => (v === null || v === undefined ? "-" : v.toFixed(d));

function plot(canvas, series, vline) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  if (vline !== undefined) [x0, x1] = [Math.min(x0, vline), Math.max(x1, vline)];
  const y1 = Math.max(...ys) * 1.05;
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - (y / y1) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, py(0));
  ctx.lineTo(w - pad, py(0));
  ctx.moveTo(pad, py(0));
  ctx.lineTo(pad, pad / 2);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 12, h - pad + 16);
    const y = (y1 * i) / 4;
    ctx.fillText(y.toPrecision(3), 2, py(y) + 4);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
    ctx.stroke();
  }
  if (vline !== undefined) {
    ctx.strokeStyle = "#555";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(px(vline), py(0));
    ctx.lineTo(px(vline), pad / 2);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function table(headers, rows) {
  const head = headers.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${head}</tr>${body}</table>`;
}

function drawLimits() {
  const v0 = Number($("var0").value);
  const v1 = Number($("var1").value);
  $("var0-out").textContent = v0;
  $("var1-out").textContent = v1;
  const pts = JSON.parse(limitCurve(v0, v1, 199)).filter((p) => p.mu >= 0.05 && p.mu <= 0.95);
  const mu = pts.map((p) => p.mu);
  plot($("limits"), [
    { x: mu, y: pts.map((p) => p.robust), color: "#1f77b4" },
    { x: mu, y: pts.map((p) => p.classical), color: "#d62728" },
  ]);
}

function runSimulation() {
  const out = $("sim-out");
  const config = {
    n: Number($("n").value),
    m: Number($("m").value),
    replicates: Number($("reps").value),
    seed: Number($("seed").value),
  };
  out.textContent = "running...";
  // let the status paint before the synchronous run
  setTimeout(() => {
    try {
      const res = JSON.parse(simulate(JSON.stringify(config)));
      const colors = { classical: "#d62728", hc0: "#1f77b4" };
      plot(
        $("density"),
        res.curves.map((c) => ({ x: c.grid, y: c.density, color: colors[c.estimator] ?? "#2ca02c" })),
        res.summary.true_se,
      );
      out.innerHTML =
        `<p>true SE ${fmt(res.summary.true_se)}, sd of slope estimates ${fmt(res.summary.beta1_sd)}</p>` +
        table(
          ["estimator", "mean SE", "sd SE", "coverage", "asymptotic SE"],
          res.summary.estimators.map((e) => [
            e.estimator, fmt(e.mean_se), fmt(e.sd_se), fmt(e.coverage, 3), fmt(e.asymptotic_se),
          ]),
        );
    } catch (e) {
      out.innerHTML = `<p class="err">${e}</p>`;
    }
  }, 10);
}

function runFit() {
  const out = $("fit-out");
  try {
    const rows = JSON.parse(fitCsv($("csv").value));
    out.innerHTML = table(
      ["coefficient", "estimate", "classical", "HC0", "HC3", "HC0 / classical"],
      rows.map((r) => [r.name, fmt(r.estimate), fmt(r.classical), fmt(r.hc0), fmt(r.hc3), fmt(r.ratio)]),
    );
  } catch (e) {
    out.innerHTML = `<p class="err">${e}</p>`;
  }
}

await init();
$("var0").addEventListener("input", drawLimits);
$("var1").addEventListener("input", drawLimits);
$("run").addEventListener("click", runSimulation);
$("fit").addEventListener("click", runFit);
drawLimits();
runFit();
