import init, { karateGraph, deterministicPartition, constantFlow, modularityCurve } from "./pkg/sheaf_communities_web.js";

const palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const color = (i) => palette[i % palette.length];
const $ = (id) => document.getElementById(id);

// Spring layout, computed once with a fixed seed so the picture is stable.
function layout(graph, width, height) {
  let s = 12345;
  const rand = () => ((s = (s * 1103515245 + 12345) % 2147483648) / 2147483648);
  const pos = Array.from({ length: graph.vertices }, () => [rand() * width, rand() * height]);
  const k = Math.sqrt((width * height) / graph.vertices) * 0.6;
  for (let iter = 0; iter < 400; iter++) {
    const disp = pos.map(() => [0, 0]);
    for (let i = 0; i < pos.length; i++) {
      for (let j = i + 1; j < pos.length; j++) {
        const dx = pos[i][0] - pos[j][0], dy = pos[i][1] - pos[j][1];
        const dist = Math.max(Math.hypot(dx, dy), 0.01);
        const f = (k * k) / dist;
        disp[i][0] += (dx / dist) * f; disp[i][1] += (dy / dist) * f;
        disp[j][0] -= (dx / dist) * f; disp[j][1] -= (dy / dist) * f;
      }
    }
    for (const [u, v] of graph.edges) {
      const dx = pos[u][0] - pos[v][0], dy = pos[u][1] - pos[v][1];
      const dist = Math.max(Math.hypot(dx, dy), 0.01);
      const f = (dist * dist) / k;
      disp[u][0] -= (dx / dist) * f; disp[u][1] -= (dy / dist) * f;
      disp[v][0] += (dx / dist) * f; disp[v][1] += (dy / dist) * f;
    }
    const temp = 20 * (1 - iter / 400) + 0.5;
    pos.forEach((p, i) => {
      const len = Math.max(Math.hypot(disp[i][0], disp[i][1]), 0.01);
      p[0] = Math.min(width - 20, Math.max(20, p[0] + (disp[i][0] / len) * Math.min(len, temp)));
      p[1] = Math.min(height - 20, Math.max(20, p[1] + (disp[i][1] / len) * Math.min(len, temp)));
    });
  }
  return pos;
}

function drawGraph(graph, pos, view) {
  const ctx = $("graph").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  graph.edges.forEach(([u, v], e) => {
    ctx.strokeStyle = view.kept[e] ? "#555" : "#ddd";
    ctx.setLineDash(view.kept[e] ? [] : [4, 4]);
    ctx.beginPath();
    ctx.moveTo(...pos[u]);
    ctx.lineTo(...pos[v]);
    ctx.stroke();
  });
  ctx.setLineDash([]);
  pos.forEach((p, v) => {
    ctx.fillStyle = color(view.labels[v]);
    ctx.beginPath();
    ctx.arc(p[0], p[1], 9, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#fff";
    ctx.font = "10px sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(String(v), p[0], p[1]);
  });
}

function axes(ctx, xmin, xmax, ymin, ymax) {
  const pad = 40, w = ctx.canvas.width, h = ctx.canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 10, w - pad - 10, h - pad - 10);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xmin.toFixed(2), pad, h - 22);
  ctx.fillText(xmax.toFixed(2), w - 40, h - 22);
  ctx.fillText(ymax.toFixed(2), 2, 20);
  ctx.fillText(ymin.toFixed(2), 2, h - pad);
  return (x, y) => [
    pad + ((x - xmin) / (xmax - xmin || 1)) * (w - pad - 10),
    10 + (1 - (y - ymin) / (ymax - ymin || 1)) * (h - pad - 10),
  ];
}

function drawFlow(traj) {
  const ctx = $("flow").getContext("2d");
  const all = traj.opinions.flat();
  const tEnd = traj.times[traj.times.length - 1];
  const at = axes(ctx, 0, tEnd, Math.min(...all), Math.max(...all));
  const labels = traj.partition ? traj.partition.labels : null;
  for (let v = 0; v < traj.opinions[0].length; v++) {
    ctx.strokeStyle = labels ? color(labels[v]) : "#888";
    ctx.beginPath();
    traj.times.forEach((t, i) => {
      const [x, y] = at(t, traj.opinions[i][v]);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}

function drawCurve(curve) {
  const ctx = $("curve").getContext("2d");
  const hi = Math.max(...curve.mean.map((m, i) => m + curve.sd[i]));
  const lo = Math.min(0, ...curve.mean.map((m, i) => m - curve.sd[i]));
  const at = axes(ctx, curve.p[0], curve.p[curve.p.length - 1], lo, hi);
  ctx.fillStyle = "rgba(31,119,180,0.2)";
  ctx.beginPath();
  curve.p.forEach((p, i) => ctx.lineTo(...at(p, curve.mean[i] + curve.sd[i])));
  [...curve.p].reverse().forEach((p, j) => {
    const i = curve.p.length - 1 - j;
    ctx.lineTo(...at(p, curve.mean[i] - curve.sd[i]));
  });
  ctx.fill();
  ctx.strokeStyle = palette[0];
  ctx.beginPath();
  curve.p.forEach((p, i) => ctx.lineTo(...at(p, curve.mean[i])));
  ctx.stroke();
}

await init();
const graph = JSON.parse(karateGraph());
const pos = layout(graph, $("graph").width, $("graph").height);

function updateDeterministic() {
  const a = Number($("a").value), b = Number($("b").value);
  $("a-val").textContent = a.toFixed(2);
  $("b-val").textContent = b.toFixed(2);
  const view = JSON.parse(deterministicPartition(a, b));
  $("det-summary").textContent = `${view.clusters} clusters, Q = ${view.modularity.toFixed(4)}`;
  drawGraph(graph, pos, view);
}

function runFlow() {
  const d = Number($("d").value);
  $("d-val").textContent = d.toFixed(1);
  const traj = JSON.parse(constantFlow(d, Number($("seed").value) >>> 0, 1000, 20));
  const tail = traj.partition
    ? `, ${traj.partition.clusters} clusters, Q = ${traj.partition.modularity.toFixed(4)}`
    : "";
  $("flow-summary").textContent = `${traj.status} at t = ${traj.times[traj.times.length - 1].toFixed(2)}${tail}`;
  drawFlow(traj);
}

function runCurve() {
  const p = Array.from({ length: 36 }, (_, i) => i / 50);
  const curve = JSON.parse(modularityCurve(new Float64Array(p), Math.max(1, Number($("runs").value)), 7));
  const best = curve.mean.indexOf(Math.max(...curve.mean));
  $("curve-summary").textContent = `max mean Q = ${curve.mean[best].toFixed(4)} at p = ${curve.p[best]}`;
  drawCurve(curve);
}

$("a").addEventListener("input", updateDeterministic);
$("b").addEventListener("input", updateDeterministic);
$("d").addEventListener("input", () => ($("d-val").textContent = Number($("d").value).toFixed(1)));
$("run-flow").addEventListener("click", runFlow);
$("run-curve").addEventListener("click", runCurve);
updateDeterministic();
runFlow();
runCurve();
