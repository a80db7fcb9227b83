import init, { rateCurves, averagedSpectrum, decayCurve } from "./pkg/dipmirror_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function sample() {
  return [num("density"), num("radius"), num("length"), Number($("m").value),
          num("splitting"), num("inhom"), $("mirror").checked, num("realizations"), num("seed")];
}

// series: [{ y, color, label }], optional bands as { lo, hi } on a series
function plot(x, series, { xlabel, ylabel, logx = false, logy = false }) {
  const c = $("plot"), g = c.getContext("2d");
  const W = c.width, H = c.height, L = 70, R = 20, T = 20, B = 50;
  g.clearRect(0, 0, W, H);
  const tx = logx ? (v) => Math.log10(v) : (v) => v;
  const ty = logy ? (v) => Math.log10(Math.max(v, 1e-12)) : (v) => v;
  const xs = x.filter((v) => !logx || v > 0).map(tx);
  const ys = series.flatMap((s) => [...s.y, ...(s.hi || [])]).map(ty).filter(Number.isFinite);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = Math.min(...ys), y1 = Math.max(...ys);
  if (!logy) y0 = Math.min(0, y0);
  if (y1 === y0) y1 = y0 + 1;
  const px = (v) => L + ((tx(v) - x0) / (x1 - x0)) * (W - L - R);
  const py = (v) => H - B - ((ty(v) - y0) / (y1 - y0)) * (H - T - B);

  g.strokeStyle = "#888"; g.fillStyle = "#222"; g.font = "12px sans-serif";
  g.strokeRect(L, T, W - L - R, H - T - B);
  for (let k = 0; k <= 5; k++) {
    const vx = x0 + ((x1 - x0) * k) / 5, vy = y0 + ((y1 - y0) * k) / 5;
    const lx = logx ? 10 ** vx : vx, ly = logy ? 10 ** vy : vy;
    g.fillText(lx.toPrecision(3), L + ((vx - x0) / (x1 - x0)) * (W - L - R) - 12, H - B + 16);
    g.fillText(ly.toPrecision(3), 8, H - B - ((vy - y0) / (y1 - y0)) * (H - T - B) + 4);
  }
  g.fillText(xlabel, W / 2, H - 12);
  g.save(); g.translate(14, H / 2 + 30); g.rotate(-Math.PI / 2); g.fillText(ylabel, 0, 0); g.restore();

  series.forEach((s, k) => {
    const ok = (i) => !logx || x[i] > 0;
    if (s.lo) {
      g.fillStyle = s.color + "33";
      g.beginPath();
      x.forEach((v, i) => ok(i) && g.lineTo(px(v), py(s.hi[i])));
      for (let i = x.length - 1; i >= 0; i--) if (ok(i)) g.lineTo(px(x[i]), py(s.lo[i]));
      g.fill();
    }
    g.strokeStyle = s.color; g.lineWidth = 2;
    g.beginPath();
    x.forEach((v, i) => ok(i) && g.lineTo(px(v), py(s.y[i])));
    g.stroke();
    g.fillStyle = s.color;
    g.fillText(s.label, W - R - 140, T + 18 + 16 * k);
  });
}

function withBand(y, se, color, label) {
  if (!se.length) return { y, color, label };
  return { y, color, label, lo: y.map((v, i) => v - se[i]), hi: y.map((v, i) => v + se[i]) };
}

function guard(fn) {
  return () => {
    $("status").textContent = "computing...";
    setTimeout(() => {
      try {
        fn();
        $("status").textContent = "";
      } catch (e) {
        $("status").textContent = String(e.message || e);
      }
    }, 10);
  };
}

await init();

$("rates").onclick = guard(() => {
  const c = rateCurves(num("zmin"), num("zmax"), 400);
  plot(c.x, [
    { y: c.y, color: "#1f6fb4", label: "m = ±1" },
    { y: c.y2, color: "#d0501f", label: "m = 0" },
  ], { xlabel: "z", ylabel: "γ / γ0" });
  $("summary").textContent = "";
});

$("spectrum").onclick = guard(() => {
  const c = averagedSpectrum(...sample(), 6, 0.05);
  plot(c.x, [withBand(c.y, c.y2, "#1f6fb4", "|b_s|² ± s.e.")],
       { xlabel: "δω (from the excited transition)", ylabel: "|b_s(ω)|²" });
  $("summary").textContent = "";
});

$("decay").onclick = guard(() => {
  const c = decayCurve(...sample(), 200);
  plot(c.x, [withBand(c.y, c.y2, "#2a8a3a", "P_sum ± s.e.")],
       { xlabel: "t", ylabel: "P_sum", logx: true, logy: true });
  const tau = c.scalar;
  $("summary").textContent = tau === undefined ? "1/e not reached" : `mean trapping time τ = ${tau.toFixed(3)}`;
});

$("rates").click();
