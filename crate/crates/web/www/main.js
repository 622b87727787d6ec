import init, { analyze, curve, phase_map, orbit } from "./pkg/cayley_gibbs_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const X_RANGE = [1e-4, 1e4];
const COLORS = ["#888", "#dfe7f2", "#f2b880", "#c0392b"];

let current = null; // last curve data, for cobweb overlay

function params() {
  return [num("j"), num("jp"), num("t")];
}

function fmt(x) {
  return x === null || x === undefined ? "-" : Number(x).toPrecision(6);
}

function logScale(lo, hi, size, flip) {
  const a = Math.log(lo), b = Math.log(hi);
  return (v) => {
    const s = (Math.log(v) - a) / (b - a);
    return flip ? size * (1 - s) : size * s;
  };
}

function drawCurve(data, cobweb) {
  const cv = $("curve"), ctx = cv.getContext("2d");
  const W = cv.width, H = cv.height;
  ctx.clearRect(0, 0, W, H);
  const ys = data.g.filter((v) => v > 0 && isFinite(v));
  const lo = Math.min(X_RANGE[0], ...ys), hi = Math.max(X_RANGE[1], ...ys);
  const sx = logScale(X_RANGE[0], X_RANGE[1], W, false);
  const sy = logScale(lo, hi, H, true);

  ctx.strokeStyle = "#eee";
  for (let e = Math.ceil(Math.log10(X_RANGE[0])); e <= Math.log10(X_RANGE[1]); e++) {
    const x = sx(10 ** e);
    ctx.beginPath(); ctx.moveTo(x, 0); ctx.lineTo(x, H); ctx.stroke();
    ctx.fillStyle = "#999"; ctx.fillText(`1e${e}`, x + 2, H - 4);
  }

  ctx.strokeStyle = "#aaa"; ctx.setLineDash([4, 4]);
  ctx.beginPath(); ctx.moveTo(sx(X_RANGE[0]), sy(X_RANGE[0])); ctx.lineTo(sx(X_RANGE[1]), sy(X_RANGE[1])); ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#1f4e99"; ctx.lineWidth = 2; ctx.beginPath();
  data.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(data.g[i])) : ctx.moveTo(sx(x), sy(data.g[i]))));
  ctx.stroke(); ctx.lineWidth = 1;

  if (cobweb && cobweb.length > 1) {
    const clamp = (v) => Math.min(Math.max(v, lo), hi);
    ctx.strokeStyle = "rgba(120,40,160,0.7)"; ctx.beginPath();
    ctx.moveTo(sx(cobweb[0]), sy(clamp(cobweb[0])));
    for (let i = 0; i + 1 < cobweb.length; i++) {
      const x = cobweb[i], y = cobweb[i + 1];
      ctx.lineTo(sx(x), sy(clamp(y)));
      ctx.lineTo(sx(y), sy(clamp(y)));
    }
    ctx.stroke();
  }

  data.roots.forEach((r, i) => {
    ctx.fillStyle = { stable: "#1a7f37", unstable: "#c62828", marginal: "#b26a00" }[data.stability[i]];
    ctx.beginPath(); ctx.arc(sx(r), sy(r), 5, 0, 2 * Math.PI); ctx.fill();
  });
  cv.onclick = (ev) => {
    const s = ev.offsetX / W;
    const x0 = Math.exp(Math.log(X_RANGE[0]) + s * (Math.log(X_RANGE[1]) - Math.log(X_RANGE[0])));
    $("x0").value = x0.toPrecision(4);
    runOrbit();
  };
}

function showSummary(s) {
  const rows = s.roots
    .map((r, i) => `<tr><td>${fmt(r)}</td><td>${fmt(s.quartic_roots[i])}</td><td>${fmt(s.derivative[i])}</td>` +
      `<td class="${s.stability[i]}">${s.stability[i]}</td></tr>`)
    .join("");
  $("summary").innerHTML = `
    <p>c = ${fmt(s.c)}, d = ${fmt(s.d)}, regime: <b>${s.regime}</b></p>
    <p>η₁ = ${fmt(s.eta1)}, η₂ = ${fmt(s.eta2)}</p>
    <table><tr><th>root</th><th>quartic</th><th>g′</th><th></th></tr>${rows}</table>
    <p>${s.roots.length} positive fixed point(s); root oracles ${s.oracles_agree ? "agree" : "<b>disagree</b>"}.
    ${s.roots.length >= 2 ? "<b>Phase transition.</b>" : ""}</p>
    <p><small>${s.prediction}</small></p>`;
}

function runAnalyze() {
  $("error").textContent = "";
  try {
    const [j, jp, t] = params();
    showSummary(JSON.parse(analyze(j, jp, t)));
    current = JSON.parse(curve(j, jp, t, X_RANGE[0], X_RANGE[1], 400));
    drawCurve(current, null);
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function runOrbit() {
  if (!current) return;
  try {
    const [j, jp, t] = params();
    const traj = Array.from(orbit(j, jp, t, num("x0"), Math.max(1, Math.min(500, num("steps")))));
    drawCurve(current, traj);
    const last = traj[traj.length - 1];
    $("orbit-out").textContent = `after ${traj.length - 1} steps: x = ${fmt(last)}`;
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function runPhase() {
  const n = Math.max(2, Math.min(200, Math.round(num("pm-n"))));
  const [j0, j1, jp0, jp1, t] = [num("pm-j0"), num("pm-j1"), num("pm-jp0"), num("pm-jp1"), num("t")];
  const counts = phase_map(j0, j1, jp0, jp1, t, n);
  const cv = $("map"), ctx = cv.getContext("2d");
  const cw = cv.width / n, ch = cv.height / n;
  for (let a = 0; a < n; a++) {
    for (let b = 0; b < n; b++) {
      ctx.fillStyle = COLORS[counts[a * n + b]] ?? COLORS[0];
      ctx.fillRect(a * cw, cv.height - (b + 1) * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
  cv.onclick = (ev) => {
    const a = Math.min(n - 1, Math.floor(ev.offsetX / cw));
    const b = Math.min(n - 1, Math.floor((cv.height - ev.offsetY) / ch));
    $("j").value = (j0 + ((j1 - j0) * a) / (n - 1)).toFixed(4);
    $("jp").value = (jp0 + ((jp1 - jp0) * b) / (n - 1)).toFixed(4);
    runAnalyze();
  };
}

await init();
$("analyze").onclick = runAnalyze;
$("orbit").onclick = runOrbit;
$("phase").onclick = runPhase;
runAnalyze();
runPhase();
