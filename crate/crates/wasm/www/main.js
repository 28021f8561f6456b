import init, { lambdaCurve, criticalIndex, momentProfile, samplePath } from "./pkg/spde_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Draws each series [{xs, ys, color}] on a shared axis box.
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.xs);
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  if (!xs.length || !ys.length) return;
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = Math.min(...ys, opts.yFloor ?? Infinity), y1 = Math.max(...ys);
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  if (y0 < 0 && y1 > 0) {
    ctx.setLineDash([4, 4]);
    ctx.beginPath(); ctx.moveTo(pad, sy(0)); ctx.lineTo(w - pad, sy(0)); ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const x of opts.marks ?? []) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath(); ctx.moveTo(sx(x), pad); ctx.lineTo(sx(x), h - pad); ctx.stroke();
  }
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  if (opts.xlabel) ctx.fillText(opts.xlabel, w / 2, h - 8);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width ?? 1.5;
    ctx.beginPath();
    let pen = false;
    s.xs.forEach((x, i) => {
      const y = s.ys[i];
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
      pen = true;
    });
    ctx.stroke();
  }
}

function guarded(out, f) {
  try {
    out.classList.remove("error");
    f();
  } catch (e) {
    out.textContent = String(e.message ?? e);
    out.classList.add("error");
  }
}

function drawCoercivity() {
  const out = $("c-out");
  guarded(out, () => {
    const m = num("c-m"), a = num("c-a"), mu = num("c-mu");
    const flat = lambdaCurve(m, a, mu, 2, num("c-pmax"), 161, $("c-pdep").checked);
    const xs = [], ys = [];
    for (let i = 0; i < flat.length; i += 2) { xs.push(flat[i]); ys.push(flat[i + 1]); }
    const pc = criticalIndex(m, a, mu);
    plot($("c-plot"), [{ xs, ys, color: "#2563eb" }], { marks: Number.isNaN(pc) ? [] : [pc], xlabel: "p" });
    out.textContent = Number.isNaN(pc)
      ? "no critical index (odd m, zero noise, or fails at p = 2)"
      : `critical p* = ${pc.toFixed(9)}   (1 + 2a/μ² = ${(1 + (2 * a) / (mu * mu)).toFixed(9)})`;
  });
}

function drawMoments() {
  const out = $("m-out");
  guarded(out, () => {
    const m = num("m-m"), mu = num("m-mu"), p = num("m-p");
    const flat = momentProfile(m, mu, p, num("m-tmax"), 200, 16);
    const ts = [], crit = [], l2 = [];
    let flip = null;
    for (let i = 0; i < flat.length; i += 4) {
      ts.push(flat[i]); crit.push(flat[i + 1]); l2.push(flat[i + 3]);
      if (flip === null && flat[i + 2] === 0) flip = flat[i];
    }
    const eps = (p - 1) * mu * mu - 2;
    plot($("m-plot"), [
      { xs: ts, ys: m % 2 === 0 ? crit : ts.map(() => eps), color: "#dc2626" },
      { xs: ts, ys: l2.map((v) => v / l2[0]), color: "#16a34a" },
    ], { marks: flip === null ? [] : [flip], xlabel: "t" });
    out.textContent = (flip === null ? "E‖u‖^p finite on the whole range" : `E‖u‖^p infinite from t ≈ ${flip.toFixed(3)}`)
      + (m % 2 === 0 && eps > 0 ? `   (2/ε = ${(2 / eps).toFixed(4)})` : "")
      + "   red: criterion, green: E‖u‖² / E‖u(0)‖²";
  });
}

function drawSample() {
  const out = $("s-out");
  guarded(out, () => {
    const m = num("s-m"), mu = num("s-mu"), t = num("s-t");
    const seed = BigInt(num("s-seed")), paths = Math.min(50, Math.max(1, num("s-paths")));
    const points = 256;
    const xs = Array.from({ length: points }, (_, j) => (2 * Math.PI * j) / points);
    const series = [];
    for (let k = 0; k < paths; k++) {
      const ys = Array.from(samplePath(m, mu, t, 16, seed, BigInt(k), points));
      series.push({ xs, ys, color: `hsl(${(k * 360) / paths} 70% 45%)`, width: 1 });
    }
    plot($("s-plot"), series, { xlabel: "x" });
    out.textContent = `t = ${t.toFixed(2)}, ${paths} paths`;
  });
}

await init();
for (const [prefix, draw] of [["c-", drawCoercivity], ["m-", drawMoments], ["s-", drawSample]]) {
  document.querySelectorAll(`input[id^="${prefix}"]`).forEach((el) => el.addEventListener("input", draw));
  draw();
}
