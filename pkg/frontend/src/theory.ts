// Display-only closed-form pair-correlation curves for the determinantal
// models. These duplicate the simulator's kernel algebra purely for
// overlays; verdicts always come from the primary component.

export type TheoryCurve = { label: string; g: (r: number) => number };

function sinc(x: number): number {
  if (Math.abs(x) < 1e-8) return 1 - (Math.PI * x) ** 2 / 6;
  return Math.sin(Math.PI * x) / (Math.PI * x);
}

export function theoryCurve(model: Record<string, unknown> | undefined): TheoryCurve | null {
  if (!model) return null;
  const kind = model.kind;
  if (kind === "ginibre") {
    return { label: "1 - exp(-r^2)", g: (r) => 1 - Math.exp(-r * r) };
  }
  if (kind === "sine_beta" && Number(model.beta) === 2) {
    return { label: "1 - sinc^2(r)", g: (r) => 1 - sinc(r) ** 2 };
  }
  return null;
}
