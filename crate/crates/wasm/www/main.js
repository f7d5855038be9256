import init, {
  alphaCurve, certificateGrid, counterexampleSlice, sectorMask, decayProfile, epsLimit,
} from "./pkg/conelab_wasm.js";

const $ = (id) => document.getElementById(id);

function axes(ctx, w, h, pad) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function drawCurve() {
  const c = $("curve"), ctx = c.getContext("2d");
  const epsMax = Math.min(+$("eps-max").value, epsLimit() - 1e-9);
  const pad = 30, w = c.width - 2 * pad, h = c.height - 2 * pad;
  const rows = 80, cols = 160;
  const grid = certificateGrid(rows, cols, epsMax);
  ctx.clearRect(0, 0, c.width, c.height);
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      ctx.fillStyle = grid[i * cols + j] > 0 ? "#cfe0ff" : "#f4f4f4";
      ctx.fillRect(pad + (j * w) / cols, pad + (i * h) / rows, w / cols + 1, h / rows + 1);
    }
  }
  const pts = alphaCurve(0.005, epsMax, 200);
  ctx.strokeStyle = "#1a4fb5";
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let k = 0; k < pts.length; k += 2) {
    const x = pad + (pts[k] / epsMax) * w, y = pad + (2 - pts[k + 1]) * h;
    k ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  }
  ctx.stroke();
  ctx.lineWidth = 1;
  axes(ctx, c.width, c.height, pad);
  ctx.fillStyle = "#333";
  ctx.fillText("α = 2", 2, pad + 4);
  ctx.fillText("α = 1", 2, c.height - pad);
  ctx.fillText(`ε = ${epsMax.toFixed(4)}`, c.width - pad - 60, c.height - 10);
  const last = pts[pts.length - 1];
  const theta = (2 * Math.acos(epsMax) * 180) / Math.PI;
  $("curve-info").textContent = `α*(${epsMax.toFixed(4)}) = ${last.toFixed(6)}, θ = ${theta.toFixed(4)}°`;
}

function colour(v, scale) {
  if (Number.isNaN(v)) return "rgb(200,200,200)";
  const t = Math.max(-1, Math.min(1, v / scale));
  const a = Math.round(255 * (1 - Math.abs(t)));
  return t >= 0 ? `rgb(255,${a},${a})` : `rgb(${a},${a},255)`;
}

function drawSlice() {
  const c = $("slice"), ctx = c.getContext("2d");
  const s = +$("slice-s").value, alpha = +$("slice-alpha").value;
  const n = 120, radius = 2;
  const vals = counterexampleSlice(1, alpha, 1, s, n, radius);
  const mask = sectorMask(1, alpha, 1, n, radius);
  let scale = 0;
  for (const v of vals) if (Number.isFinite(v)) scale = Math.max(scale, Math.abs(v));
  scale = scale || 1;
  const cell = c.width / n;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      ctx.fillStyle = colour(vals[i * n + j], scale);
      ctx.fillRect(j * cell, i * cell, cell + 1, cell + 1);
    }
  }
  ctx.fillStyle = "rgba(0,0,0,0.6)";
  for (let i = 1; i < n - 1; i++) {
    for (let j = 1; j < n - 1; j++) {
      const k = i * n + j;
      if (mask[k] && (!mask[k - 1] || !mask[k + 1] || !mask[k - n] || !mask[k + n])) {
        ctx.fillRect(j * cell, i * cell, cell, cell);
      }
    }
  }
  $("slice-info").textContent = `half-angle π/(2α) = ${(90 / alpha).toFixed(2)}°, colour scale ±${scale.toPrecision(3)}`;
}

function drawDecay() {
  const c = $("decay"), ctx = c.getContext("2d");
  const radius = +$("radius").value, dim = +$("dim").value;
  const p = decayProfile(dim, radius, 40);
  const t = p.times(), v = p.values(), e = p.envelope();
  const pad = 30, w = c.width - 2 * pad, h = c.height - 2 * pad;
  const floor = -12;
  const ty = (u) => pad + (Math.max(floor, Math.log10(Math.max(u, 1e-300))) / floor) * h;
  const tx = (s) => pad + (s / t[t.length - 1]) * w;
  ctx.clearRect(0, 0, c.width, c.height);
  axes(ctx, c.width, c.height, pad);
  const line = (ys, dash, colourName) => {
    ctx.setLineDash(dash);
    ctx.strokeStyle = colourName;
    ctx.beginPath();
    let started = false;
    for (let k = 0; k < t.length; k++) {
      if (ys[k] <= 0) continue;
      started ? ctx.lineTo(tx(t[k]), ty(ys[k])) : ctx.moveTo(tx(t[k]), ty(ys[k]));
      started = true;
    }
    ctx.stroke();
    ctx.setLineDash([]);
  };
  line(v, [], "#b51a1a");
  line(e, [5, 4], "#1a4fb5");
  ctx.fillStyle = "#333";
  ctx.fillText("1", 4, pad + 4);
  ctx.fillText("1e-12", 0, c.height - pad);
  ctx.fillText(`t = ${t[t.length - 1].toFixed(2)}`, c.width - pad - 50, c.height - 10);
  $("decay-info").textContent = `fitted β = ${p.beta().toFixed(4)}`;
  p.free();
}

await init();
for (const [id, f] of [["eps-max", drawCurve], ["slice-s", drawSlice], ["slice-alpha", drawSlice], ["radius", drawDecay], ["dim", drawDecay]]) {
  $(id).addEventListener("input", f);
}
drawCurve();
drawSlice();
drawDecay();
