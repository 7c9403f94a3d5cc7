// Cluster palette. Hues step by the golden angle so neighbouring cluster
// indices land far apart on the wheel no matter how many clusters exist.

export function clusterColor(cluster: number, alpha = 1): string {
  const hue = (cluster * 137.508) % 360;
  return `hsla(${hue.toFixed(1)}, 65%, 52%, ${alpha})`;
}

export const CROSS_EDGE_COLOR = "#e04b3a";
export const INTRA_EDGE_COLOR = "#b9c2cc";
