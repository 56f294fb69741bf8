//! Static SVG histogram with the semicircle density overlaid. Pure string
//! assembly, regenerated entirely from the sample data.


const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 45.0;

pub fn histogram_svg(samples: &[f64], bins: usize, title: &str) -> String {
    let bins = bins.max(2);
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let b = ((s * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = samples.len() as f64;
    let bin_w = 1.0 / bins as f64;
    // Densities so the histogram and the overlay share a scale.
    let densities: Vec<f64> = counts.iter().map(|&c| c as f64 / n / bin_w).collect();
    let density_max = densities
        .iter()
        .cloned()
        .fold(4.0 / std::f64::consts::PI, f64::max)
        * 1.08;

    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let x_of = |u: f64| MARGIN + u * plot_w;
    let y_of = |d: f64| H - MARGIN - (d / density_max) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    ));
    for (i, &d) in densities.iter().enumerate() {
        let x0 = x_of(i as f64 * bin_w);
        let y0 = y_of(d);
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"0.5\"/>\n",
            x0,
            y0,
            bin_w * plot_w,
            (H - MARGIN) - y0
        ));
    }
    // Semicircle density as finite differences of the exact CDF, so the
    // overlay matches what the KS statistic compares against.
    let mut path = String::from("M");
    let steps = 256;
    for i in 0..=steps {
        let u = i as f64 / steps as f64;
        let d = 4.0 / std::f64::consts::PI * (1.0 - u * u).max(0.0).sqrt();
        path.push_str(&format!(" {:.2} {:.2}", x_of(u), y_of(d)));
    }
    out.push_str(&format!(
        "<path d=\"{path}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.8\"/>\n"
    ));
    // Axes.
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    ));
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{u:.2}</text>\n",
            x_of(u),
            H - MARGIN + 16.0
        ));
    }
    out.push_str("</svg>\n");
    out
}
