import init, { presetConfig, varianceCurve, varianceHeatmap, ensembleEnvelope } from "./pkg/comb_entangler_wasm.js";

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");
const pad = { left: 60, right: 20, top: 20, bottom: 40 };

function inputs() {
  return {
    config: $("config").value,
    j: Number($("j").value) - 1,
    l: Number($("l").value) - 1,
    lo: Number($("lo").value),
    hi: Number($("hi").value),
    points: Number($("points").value),
  };
}

function axis(lo, hi, vmin, vmax, ylabel) {
  ctx.restore();
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width - pad.left - pad.right;
  const h = canvas.height - pad.top - pad.bottom;
  const x = (v) => pad.left + ((v - lo) / (hi - lo)) * w;
  const y = (v) => pad.top + (1 - (v - vmin) / (vmax - vmin)) * h;
  ctx.strokeStyle = "#000";
  ctx.strokeRect(pad.left, pad.top, w, h);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const xv = lo + ((hi - lo) * k) / 4;
    const yv = vmin + ((vmax - vmin) * k) / 4;
    ctx.fillText(xv.toFixed(3), x(xv) - 15, pad.top + h + 16);
    ctx.fillText(yv.toFixed(3), 4, y(yv) + 4);
  }
  ctx.fillText("ω / Ω", pad.left + w / 2, canvas.height - 6);
  ctx.fillText(ylabel, 4, 12);
  ctx.save();
  ctx.beginPath();
  ctx.rect(pad.left, pad.top, w, h);
  ctx.clip();
  return { x, y };
}

// Thermal peaks near resonance can reach 1e4; keep the axis on the region near the bound.
function range(values) {
  const lo = Math.min(...values, 2);
  const hi = Math.min(Math.max(...values, 2), 4);
  const m = 0.05 * (hi - lo || 1);
  return [lo - m, hi + m];
}

function line(map, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  xs.forEach((xv, k) => (k ? ctx.lineTo(map.x(xv), map.y(ys[k])) : ctx.moveTo(map.x(xv), map.y(ys[k]))));
  ctx.stroke();
}

function bound(map, lo, hi) {
  ctx.setLineDash([4, 4]);
  line(map, [lo, hi], [2, 2], "#888");
  ctx.setLineDash([]);
}

function grid(p) {
  return Array.from({ length: p.points }, (_, k) => p.lo + ((p.hi - p.lo) * k) / (p.points - 1));
}

function drawCurve() {
  const p = inputs();
  const v = varianceCurve(p.config, p.j, p.l, p.lo, p.hi, p.points);
  const [vmin, vmax] = range(v);
  const map = axis(p.lo, p.hi, vmin, vmax, "V");
  bound(map, p.lo, p.hi);
  line(map, grid(p), v, "#1f5fbf");
  return `min V = ${Math.min(...v).toFixed(4)}`;
}

function drawHeatmap() {
  const p = inputs();
  const nt = Number($("theta-points").value);
  const v = varianceHeatmap(p.config, p.j, p.l, p.lo, p.hi, p.points, nt);
  axis(p.lo, p.hi, -Math.PI, Math.PI, "θ");
  const w = canvas.width - pad.left - pad.right;
  const h = canvas.height - pad.top - pad.bottom;
  const [vmin, vmax] = [Math.min(...v), Math.max(...v)];
  const cw = w / p.points;
  const ch = h / nt;
  for (let t = 0; t < nt; t++) {
    for (let k = 0; k < p.points; k++) {
      const val = v[t * p.points + k];
      // Blue below the separability bound, red above.
      if (val < 2) {
        const s = (2 - val) / Math.max(2 - vmin, 1e-12);
        ctx.fillStyle = `rgb(${255 * (1 - s)},${255 * (1 - s)},255)`;
      } else {
        const s = (val - 2) / Math.max(vmax - 2, 1e-12);
        ctx.fillStyle = `rgb(255,${255 * (1 - s)},${255 * (1 - s)})`;
      }
      ctx.fillRect(pad.left + k * cw, pad.top + h - (t + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
  ctx.strokeRect(pad.left, pad.top, w, h);
  return `V ranges over [${vmin.toFixed(4)}, ${vmax.toFixed(4)}]`;
}

function drawEnvelope() {
  const p = inputs();
  const v = ensembleEnvelope(
    p.config, p.j, p.l,
    Number($("sigma").value), Number($("samples").value), BigInt($("seed").value),
    p.lo, p.hi, p.points,
  );
  const n = p.points;
  const [min, mean, max] = [v.slice(0, n), v.slice(n, 2 * n), v.slice(2 * n)];
  const [vmin, vmax] = range(v);
  const map = axis(p.lo, p.hi, vmin, vmax, "V");
  const xs = grid(p);
  ctx.fillStyle = "rgba(31,95,191,0.2)";
  ctx.beginPath();
  xs.forEach((xv, k) => (k ? ctx.lineTo(map.x(xv), map.y(max[k])) : ctx.moveTo(map.x(xv), map.y(max[k]))));
  for (let k = n - 1; k >= 0; k--) ctx.lineTo(map.x(xs[k]), map.y(min[k]));
  ctx.fill();
  bound(map, p.lo, p.hi);
  line(map, xs, mean, "#1f5fbf");
  return `worst max V = ${Math.max(...max).toFixed(4)}`;
}

function guarded(draw) {
  return () => {
    try {
      $("status").textContent = draw();
      $("status").style.color = "#333";
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
      $("status").style.color = "#a00";
    }
  };
}

function loadPreset() {
  $("config").value = JSON.stringify(JSON.parse(presetConfig($("preset").value)), null, 2);
}

await init();
$("preset").addEventListener("change", () => {
  loadPreset();
  guarded(drawCurve)();
});
$("run-curve").addEventListener("click", guarded(drawCurve));
$("run-heatmap").addEventListener("click", guarded(drawHeatmap));
$("run-envelope").addEventListener("click", guarded(drawEnvelope));
loadPreset();
guarded(drawCurve)();
