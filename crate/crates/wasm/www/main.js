import init, { link_demo, score_landscape, fit_demo } from "./pkg/monosi_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function bounds(series) {
  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (const pts of series) {
    for (const [x, y] of pts) {
      x0 = Math.min(x0, x); x1 = Math.max(x1, x);
      y0 = Math.min(y0, y); y1 = Math.max(y1, y);
    }
  }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  return { x0, x1, y0, y1 };
}

function axes(ctx, w, h, pad, b) {
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(b.x0.toFixed(2), pad, h - pad + 14);
  ctx.fillText(b.x1.toFixed(2), w - pad - 30, h - pad + 14);
  ctx.fillText(b.y1.toFixed(1), 2, pad + 4);
  ctx.fillText(b.y0.toFixed(1), 2, h - pad);
}

// Scatter, true link and the right-continuous isotonic step function.
function drawLink(canvas, res) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const b = bounds([res.points, res.truth]);
  const sx = (x) => pad + ((x - b.x0) / (b.x1 - b.x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - b.y0) / (b.y1 - b.y0)) * (h - 2 * pad);
  axes(ctx, w, h, pad, b);

  ctx.fillStyle = "rgba(60,90,200,0.35)";
  for (const [x, y] of res.points) ctx.fillRect(sx(x) - 1, sy(y) - 1, 2, 2);

  ctx.strokeStyle = "#2a9d2a";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  res.truth.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
  ctx.stroke();

  const { knots, values } = res.fit;
  const right = b.x1;
  ctx.strokeStyle = "#d33";
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let i = 0; i < knots.length; i++) {
    const xa = sx(knots[i]);
    const xb = sx(i + 1 < knots.length ? knots[i + 1] : right);
    const y = sy(values[i]);
    if (i === 0) ctx.moveTo(xa, y); else ctx.lineTo(xa, y);
    ctx.lineTo(xb, y);
  }
  ctx.stroke();
  ctx.lineWidth = 1;
}

function colour(v) {
  const r = Math.round(255 * Math.min(1, 1.6 * v));
  const g = Math.round(255 * Math.max(0, Math.min(1, 1.6 * v - 0.3)));
  const bl = Math.round(255 * Math.max(0, 0.6 - v));
  return `rgb(${r},${g},${bl})`;
}

// Heat map of |score| on a log scale, with the true angles marked.
function drawLandscape(canvas, res) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const k = res.beta1.length;
  const logs = res.values.flat().map((v) => Math.log10(v + 1e-300));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const cw = w / k;
  const ch = h / k;
  for (let j = 0; j < k; j++) {
    for (let i = 0; i < k; i++) {
      const t = (Math.log10(res.values[j][i] + 1e-300) - lo) / (hi - lo || 1);
      ctx.fillStyle = colour(t);
      ctx.fillRect(i * cw, h - (j + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
  const [t1, t2] = res.truth;
  const span1 = res.beta1[k - 1] - res.beta1[0];
  const span2 = res.beta2[k - 1] - res.beta2[0];
  const px = ((t1 - res.beta1[0]) / span1) * w;
  const py = h - ((t2 - res.beta2[0]) / span2) * h;
  ctx.strokeStyle = "#fff";
  ctx.beginPath();
  ctx.arc(px, py, 6, 0, 2 * Math.PI);
  ctx.stroke();
  let best = [0, 0];
  for (let j = 0; j < k; j++) for (let i = 0; i < k; i++) {
    if (res.values[j][i] < res.values[best[0]][best[1]]) best = [j, i];
  }
  return { min: res.values[best[0]][best[1]], at: [res.beta1[best[1]], res.beta2[best[0]]], lo, hi };
}

function guard(infoId, f) {
  try {
    f();
  } catch (e) {
    $(infoId).innerHTML = `<span class="err">${e.message ?? e}</span>`;
  }
}

function runLink() {
  guard("link-info", () => {
    const res = JSON.parse(link_demo($("link-model").value, num("link-n"), num("link-seed"), num("link-sd")));
    drawLink($("link-canvas"), res);
    $("link-info").textContent =
      `${res.blocks} blocks; mean squared error against the true link ${res.l2_error.toExponential(3)}`;
  });
}

function runLandscape() {
  guard("land-info", () => {
    const t0 = performance.now();
    const res = JSON.parse(score_landscape($("land-model").value, num("land-n"), num("land-seed"),
      $("land-eff").checked, num("land-grid"), num("land-radius")));
    const s = drawLandscape($("land-canvas"), res);
    const ms = (performance.now() - t0).toFixed(0);
    $("land-info").textContent =
      `|score| ranges over 1e${s.lo.toFixed(1)} .. 1e${s.hi.toFixed(1)}; grid minimum ${s.min.toExponential(2)} ` +
      `at (${s.at[0].toFixed(3)}, ${s.at[1].toFixed(3)}); truth circled at ` +
      `(${res.truth[0].toFixed(3)}, ${res.truth[1].toFixed(3)}); ${ms} ms`;
  });
}

function runFit() {
  guard("fit-info", () => {
    const t0 = performance.now();
    const res = JSON.parse(fit_demo($("fit-est").value, $("fit-model").value, num("fit-n"),
      num("fit-seed"), num("fit-starts")));
    const ms = (performance.now() - t0).toFixed(0);
    drawLink($("fit-canvas"), res);
    const f = (v) => v.map((x) => x.toFixed(4)).join(", ");
    $("fit-info").textContent =
      `alpha_unit  = (${f(res.alpha_unit)})\n` +
      `alpha_0     = (${f(res.alpha0)})\n` +
      `|error|     = ${res.error.toExponential(3)}\n` +
      `criterion   = ${res.criterion.toExponential(4)}\n` +
      `converged   = ${res.converged}, evaluations = ${res.evaluations}, ${ms} ms`;
  });
}

await init();
$("link-run").addEventListener("click", runLink);
$("land-run").addEventListener("click", runLandscape);
$("fit-run").addEventListener("click", runFit);
runLink();
