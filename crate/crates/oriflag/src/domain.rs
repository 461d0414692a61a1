//! Sampling oriented limit flags of Schottky-type matrix groups, membership
//! in the removed set for a chosen balanced ideal, and rasterized domains of
//! discontinuity on the sphere of oriented lines.

use crate::bruhat::PositionSpace;
use crate::flag::{
    canonicalize, extend_line_to_matrix, factorize_f64_in_place, OrientedFlag, OrientedSubspace,
};
use crate::ideal::Ideal;
use crate::mat::Mat;
use crate::weyl::SignedPermutation;
use crate::{Error, Result};
use rayon::prelude::*;

/// A freely reduced word in the generators: letter ±(i+1) is generator i or
/// its inverse.
pub type Word = Vec<i32>;

/// A finitely generated matrix group with chosen generators.
#[derive(Debug, Clone)]
pub struct MatrixGroupSpec {
    n: usize,
    generators: Vec<Mat<f64>>,
    inverses: Vec<Mat<f64>>,
}

impl MatrixGroupSpec {
    /// Validates that all generators are square of the same size with
    /// determinant close to one, and precomputes inverses.
    pub fn new(n: usize, generators: Vec<Mat<f64>>, eps: f64) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Parse("at least one generator required".into()));
        }
        let mut inverses = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.rows() != n || g.cols() != n {
                return Err(Error::RankMismatch(g.rows(), n));
            }
            let det = g.det();
            if (det - 1.0).abs() > 1e-6_f64.max(eps) {
                return Err(Error::Parse(format!(
                    "generator determinant {det} is not 1"
                )));
            }
            inverses.push(g.inverse(eps)?);
        }
        Ok(Self {
            n,
            generators,
            inverses,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, i: usize) -> &Mat<f64> {
        &self.generators[i]
    }

    /// The matrix of a word.
    pub fn evaluate(&self, word: &[i32]) -> Mat<f64> {
        let mut out = Mat::<f64>::identity(self.n);
        for &letter in word {
            let m = if letter > 0 {
                &self.generators[(letter - 1) as usize]
            } else {
                &self.inverses[(-letter - 1) as usize]
            };
            out = out.mul(m);
        }
        out
    }
}

/// All freely reduced words of length 1..=max_len, shortest first, letters
/// ordered 1, -1, 2, -2, ...
pub fn reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    let letters: Vec<i32> = (1..=rank as i32).flat_map(|i| [i, -i]).collect();
    let mut out: Vec<Word> = Vec::new();
    let mut layer: Vec<Word> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for &l in &letters {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut ext = w.clone();
                ext.push(l);
                next.push(ext);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Freely reduced words that are also cyclically reduced (first letter is not
/// the inverse of the last).
pub fn cyclically_reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    reduced_words(rank, max_len)
        .into_iter()
        .filter(|w| w.len() < 2 || w[0] != -w[w.len() - 1])
        .collect()
}

/// The attracting oriented flag of a proximal matrix: the limit of the
/// orthonormalize-then-multiply iteration from the identity flag. This picks
/// one specific lift of the attracting flag; other lifts are its right
/// sign-group twists.
///
/// A base flag can sit in a degenerate position (a column aligned with a
/// non-dominant eigenvector), in which case the iteration stalls on a wrong
/// cell; that is detected by a dominance check and retried from a fixed
/// generic base.
pub fn attracting_flag(g: &Mat<f64>, iters: usize, tol: f64) -> Result<OrientedFlag> {
    let eps = tol.min(1e-9);
    let n = g.rows();
    for base_try in 0..3 {
        let mut flag = match base_flag(n, base_try, eps) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let mut converged = false;
        for _ in 0..iters {
            let Ok(next) = canonicalize(&g.mul(flag.rep()), eps) else {
                converged = false;
                break;
            };
            let d = flag.dist(&next);
            flag = next;
            if d < tol {
                converged = true;
                break;
            }
        }
        if converged && is_dominant_limit(g, &flag) {
            return Ok(flag);
        }
    }
    Err(Error::NotProximal)
}

fn base_flag(n: usize, try_index: usize, eps: f64) -> Result<OrientedFlag> {
    if try_index == 0 {
        return Ok(OrientedFlag::identity(n));
    }
    // Small deterministic perturbations of the identity; entries are kept
    // below 1/n so the determinant stays positive.
    let m = Mat::from_fn(n, n, |i, j| {
        let noise = ((i * 7 + j * 13 + try_index * 29) % 11) as f64 / 11.0 - 0.5;
        (if i == j { 1.0 } else { 0.0 }) + 0.8 * noise / n as f64
    });
    canonicalize(&m, eps)
}

/// Whether g·F = F·u with u upper triangular of strictly decreasing diagonal
/// modulus, i.e. F really is the attracting flag of g.
fn is_dominant_limit(g: &Mat<f64>, flag: &OrientedFlag) -> bool {
    let u = flag.rep().transpose().mul(g).mul(flag.rep());
    let n = u.rows();
    let scale = u.max_abs().max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if u[(i, j)].abs() > 1e-6 * scale {
                return false;
            }
        }
    }
    (0..n - 1).all(|i| u[(i, i)].abs() > u[(i + 1, i + 1)].abs() * (1.0 + 1e-12))
}

/// An attracting flag labeled by the group word that produced it.
#[derive(Debug, Clone)]
pub struct LimitSample {
    pub word: Word,
    pub flag: OrientedFlag,
}

/// Result of sampling: flags for the convergent words and the count of words
/// skipped because power iteration failed to converge.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<LimitSample>,
    pub skipped: usize,
}

impl SampleSet {
    /// Right-multiplies every flag by a fixed sign twist, selecting a
    /// different continuous lift of the limit set.
    pub fn twist(&self, m: &SignedPermutation) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| LimitSample {
                    word: s.word.clone(),
                    flag: s.flag.twist(m),
                })
                .collect(),
            skipped: self.skipped,
        }
    }

    /// Right-twists every sample so that its position relative to the first
    /// sample is exactly the given transversality type, which makes the lifts
    /// consistent with a single continuous lift of the limit set. Samples
    /// whose position against the reference is not transverse (numerically
    /// coincident boundary points) are dropped and counted in `skipped`.
    pub fn normalize_transversality(
        &self,
        ctx: &crate::weyl::GroupContext,
        w0: &SignedPermutation,
        eps: f64,
    ) -> Result<Self> {
        if !ctx.is_transverse(w0) {
            return Err(Error::NotTransverse);
        }
        let Some(reference) = self.samples.first() else {
            return Ok(self.clone());
        };
        let ref_t = reference.flag.rep().transpose();
        let mut samples = vec![reference.clone()];
        let mut skipped = self.skipped;
        for s in &self.samples[1..] {
            let Ok(t) = crate::flag::bruhat_factorize(&ref_t.mul(s.flag.rep()), eps) else {
                skipped += 1;
                continue;
            };
            if !ctx.is_transverse(&t) {
                skipped += 1;
                continue;
            }
            // The unique sign twist with pos(ref, f·m) = w0.
            let m = ctx.compose(&ctx.inverse(&t), w0);
            debug_assert!(ctx.is_in_mbar(&m));
            samples.push(LimitSample {
                word: s.word.clone(),
                flag: s.flag.twist(&m),
            });
        }
        Ok(Self { samples, skipped })
    }

    /// Drops samples whose flag coincides with an earlier one within `tol`
    /// (powers of a word share its fixed flag). Keeps first occurrences, so
    /// the result is deterministic.
    pub fn dedup(&self, tol: f64) -> Self {
        let mut kept: Vec<LimitSample> = Vec::with_capacity(self.samples.len());
        let mut buckets: std::collections::HashMap<Vec<i64>, Vec<usize>> =
            std::collections::HashMap::new();
        let q = tol.max(1e-12) * 4.0;
        for s in &self.samples {
            let key: Vec<i64> = s
                .flag
                .rep()
                .data()
                .iter()
                .map(|x| (x / q).round() as i64)
                .collect();
            let mut duplicate = false;
            // Probe the exact bucket only; boundary collisions just reduce
            // the amount of deduplication.
            if let Some(indices) = buckets.get(&key) {
                duplicate = indices.iter().any(|&i| kept[i].flag.dist(&s.flag) < tol);
            }
            if !duplicate {
                buckets.entry(key).or_default().push(kept.len());
                kept.push(s.clone());
            }
        }
        Self {
            samples: kept,
            skipped: self.skipped,
        }
    }
}

/// Attracting flags of all cyclically reduced words of length at most
/// `max_len`, skipping words whose power dynamics do not converge.
pub fn sample_limit_set(
    spec: &MatrixGroupSpec,
    max_len: usize,
    iters: usize,
    tol: f64,
) -> SampleSet {
    let words = cyclically_reduced_words(spec.rank(), max_len);
    let results: Vec<Option<LimitSample>> = words
        .par_iter()
        .map(|word| {
            let g = spec.evaluate(word);
            attracting_flag(&g, iters, tol)
                .ok()
                .map(|flag| LimitSample {
                    word: word.clone(),
                    flag,
                })
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    SampleSet {
        samples: results.into_iter().flatten().collect(),
        skipped,
    }
}

/// Whether the oriented line `p` lies in the removed set: some sampled flag
/// sees it at a relative position inside the ideal. Positions within `tol`
/// of a stratum boundary resolve to the smaller cell, and positions that
/// cannot be resolved at all count as inside; both keep the removed set
/// closed.
pub fn k_membership(
    p: &OrientedSubspace,
    samples: &[LimitSample],
    ideal: &Ideal,
    space: &PositionSpace,
    tol: f64,
) -> Result<bool> {
    if p.dim() != 1 {
        return Err(Error::RankMismatch(p.dim(), 1));
    }
    let n = p.ambient();
    let ext = extend_line_to_matrix(p, tol)?;
    let mut buf = vec![0.0f64; n * n];
    let mut perm = vec![0usize; n];
    let mut signs = vec![0i8; n];
    let mut used = vec![false; n];
    for sample in samples {
        let b = sample.flag.rep().transpose().mul(&ext);
        buf.copy_from_slice(b.data());
        match factorize_f64_in_place(&mut buf, n, tol, &mut perm, &mut signs, &mut used) {
            Ok(()) => {
                if ideal.contains(space.class_of_raw(&perm, &signs)) {
                    return Ok(true);
                }
            }
            Err(_) => return Ok(true),
        }
    }
    Ok(false)
}

/// An 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; 3 * width * height],
        }
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let at = 3 * (y * self.width + x);
        self.pixels[at..at + 3].copy_from_slice(&rgb);
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let at = 3 * (y * self.width + x);
        [self.pixels[at], self.pixels[at + 1], self.pixels[at + 2]]
    }

    /// Binary PPM with the exact header `P6\n<w> <h>\n255\n`.
    pub fn write_ppm(&self, mut out: impl std::io::Write) -> Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)?;
        Ok(())
    }
}

/// Chart used to map pixels to directions on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Chart {
    /// Longitude across, latitude down; covers the whole sphere.
    #[default]
    Equirectangular,
    /// Affine chart through the plane z = 1, covering one open hemisphere;
    /// `scale` half-widths of the plane are visible.
    Gnomonic,
}

/// Direction on the unit sphere for an equirectangular pixel grid.
fn pixel_direction(x: usize, y: usize, width: usize, height: usize) -> [f64; 3] {
    let lon = 2.0 * std::f64::consts::PI * ((x as f64 + 0.5) / width as f64) - std::f64::consts::PI;
    let lat = std::f64::consts::FRAC_PI_2 - std::f64::consts::PI * ((y as f64 + 0.5) / height as f64);
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Direction for a gnomonic pixel grid on the plane z = 1.
fn pixel_direction_gnomonic(
    x: usize,
    y: usize,
    width: usize,
    height: usize,
    scale: f64,
) -> [f64; 3] {
    let u = scale * (2.0 * (x as f64 + 0.5) / width as f64 - 1.0);
    let v = scale * (1.0 - 2.0 * (y as f64 + 0.5) / height as f64);
    let norm = (u * u + v * v + 1.0).sqrt();
    [u / norm, v / norm, 1.0 / norm]
}

const DARK: [u8; 3] = [0, 0, 0];
const LIGHT: [u8; 3] = [255, 255, 255];

/// Rasterizes the removed set over the sphere of oriented lines: a pixel is
/// dark when its oriented line lies in the removed set within `tol`. The
/// removed strata have positive codimension, so a raster is only visible
/// with `tol` of the order of the angular pixel size; positions within the
/// tolerance of a stratum boundary resolve to the smaller stratum, keeping
/// the rendered set closed. For n > 3 the sphere is embedded along the first
/// three coordinates.
pub fn render_from_samples(
    samples: &[LimitSample],
    ideal: &Ideal,
    space: &PositionSpace,
    width: usize,
    height: usize,
    tol: f64,
) -> Result<RasterImage> {
    render_chart(samples, ideal, space, width, height, tol, Chart::Equirectangular, 2.0)
}

/// `render_from_samples` with an explicit chart; `scale` only applies to the
/// gnomonic chart.
#[allow(clippy::too_many_arguments)]
pub fn render_chart(
    samples: &[LimitSample],
    ideal: &Ideal,
    space: &PositionSpace,
    width: usize,
    height: usize,
    tol: f64,
    chart: Chart,
    scale: f64,
) -> Result<RasterImage> {
    let n = space.ctx().n();
    if n < 3 || n % 2 == 0 {
        return Err(Error::BlockRange { n, k: 0 });
    }
    // When the right type stabilizes the first flag part, the class of an
    // element depends only on the first column; a per-(row, sign) class
    // table then replaces the full factorization in the pixel loop.
    let column_classes = first_column_class_table(space);
    // Transposed flags once, and flat scratch per row.
    let transposed: Vec<Mat<f64>> = samples.iter().map(|s| s.flag.rep().transpose()).collect();
    let rows: Vec<Vec<u8>> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![0u8; 3 * width];
            let mut buf = vec![0.0f64; n * n];
            let mut perm = vec![0usize; n];
            let mut signs = vec![0i8; n];
            let mut used = vec![false; n];
            let mut ext_data = vec![0.0f64; n * n];
            let mut col = vec![0.0f64; n];
            for x in 0..width {
                let dir3 = match chart {
                    Chart::Equirectangular => pixel_direction(x, y, width, height),
                    Chart::Gnomonic => pixel_direction_gnomonic(x, y, width, height, scale),
                };
                let mut dir = vec![0.0f64; n];
                dir[..3].copy_from_slice(&dir3);
                let p = OrientedSubspace::line(&dir, 1e-12).expect("unit direction");
                let ext = extend_line_to_matrix(&p, 1e-12).expect("line completion");
                ext_data.copy_from_slice(ext.data());
                let mut dark = false;
                for t in &transposed {
                    let td = t.data();
                    if let Some(table) = &column_classes {
                        // col = t · p, the only data the class depends on.
                        let mut norm_sq = 0.0;
                        for i in 0..n {
                            let mut acc = 0.0;
                            for k in 0..n {
                                acc += td[i * n + k] * ext_data[k * n];
                            }
                            col[i] = acc;
                            norm_sq += acc * acc;
                        }
                        let threshold = tol * norm_sq.sqrt();
                        let Some(r) = (0..n).rev().find(|&i| col[i].abs() > threshold) else {
                            continue;
                        };
                        let class = table[2 * r + usize::from(col[r] > 0.0)];
                        if ideal.contains(class) {
                            dark = true;
                            break;
                        }
                    } else {
                        // buf = t · ext, then a full factorization.
                        for i in 0..n {
                            for j in 0..n {
                                let mut acc = 0.0;
                                for k in 0..n {
                                    acc += td[i * n + k] * ext_data[k * n + j];
                                }
                                buf[i * n + j] = acc;
                            }
                        }
                        // Unresolvable positions count as removed, matching
                        // the conservative membership semantics.
                        let hit = match factorize_f64_in_place(
                            &mut buf, n, tol, &mut perm, &mut signs, &mut used,
                        ) {
                            Ok(()) => ideal.contains(space.class_of_raw(&perm, &signs)),
                            Err(_) => true,
                        };
                        if hit {
                            dark = true;
                            break;
                        }
                    }
                }
                let rgb = if dark { DARK } else { LIGHT };
                row[3 * x..3 * x + 3].copy_from_slice(&rgb);
            }
            row
        })
        .collect();
    let mut img = RasterImage::new(width, height);
    for (y, row) in rows.into_iter().enumerate() {
        img.pixels[3 * width * y..3 * width * (y + 1)].copy_from_slice(&row);
    }
    Ok(img)
}

/// Class table indexed by 2·row + (sign > 0), when the class of every group
/// element is determined by its first column; `None` otherwise.
fn first_column_class_table(space: &PositionSpace) -> Option<Vec<usize>> {
    let ctx = space.ctx();
    let n = ctx.n();
    let mut table = vec![usize::MAX; 2 * n];
    for w in ctx.elements() {
        let slot = 2 * w.perm()[0] + usize::from(w.signs()[0] > 0);
        let class = space.class_of(&w);
        if table[slot] == usize::MAX {
            table[slot] = class;
        } else if table[slot] != class {
            return None;
        }
        if ctx.projective() {
            // The canonical representative hides the negated form; cover it.
            let neg_slot = 2 * w.perm()[0] + usize::from(w.signs()[0] <= 0);
            let neg = ctx.canonize(negated(&w));
            let neg_class = space.class_of(&neg);
            if table[neg_slot] == usize::MAX {
                table[neg_slot] = neg_class;
            } else if table[neg_slot] != neg_class {
                return None;
            }
        }
    }
    table.iter().all(|&c| c != usize::MAX).then_some(table)
}

fn negated(w: &SignedPermutation) -> SignedPermutation {
    SignedPermutation::new(
        w.perm().to_vec(),
        w.signs().iter().map(|s| -s).collect(),
    )
    .expect("negation stays unimodular")
}

/// Samples the limit set of the group, makes the oriented lifts consistent,
/// and rasterizes the removed set.
pub fn render_sphere(
    spec: &MatrixGroupSpec,
    max_len: usize,
    ideal: &Ideal,
    space: &PositionSpace,
    width: usize,
    height: usize,
    opts: &RenderOptions,
) -> Result<(RasterImage, SampleSet)> {
    let mut set = sample_limit_set(spec, max_len, opts.iters, opts.tol)
        .dedup(opts.tol * 100.0);
    if let Some(w0) = &opts.normalize_to {
        set = set.normalize_transversality(space.ctx(), w0, opts.eps)?;
    }
    if let Some(m) = &opts.twist {
        set = set.twist(m);
    }
    let band = opts
        .band
        .unwrap_or(std::f64::consts::PI / height.max(1) as f64);
    let img = render_chart(
        &set.samples,
        ideal,
        space,
        width,
        height,
        band,
        opts.chart,
        opts.chart_scale,
    )?;
    Ok((img, set))
}

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub iters: usize,
    pub tol: f64,
    pub eps: f64,
    /// Angular half-width at which a pixel counts as touching a removed
    /// stratum; defaults to the pixel size of the raster.
    pub band: Option<f64>,
    pub chart: Chart,
    /// Half-width of the visible plane window in the gnomonic chart.
    pub chart_scale: f64,
    /// Transversality type to which all sampled lifts are gauge-fixed.
    pub normalize_to: Option<SignedPermutation>,
    /// Global right twist applied after normalization, selecting another
    /// continuous lift.
    pub twist: Option<SignedPermutation>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            iters: 3000,
            tol: 1e-8,
            eps: 1e-9,
            band: None,
            chart: Chart::Equirectangular,
            chart_scale: 2.0,
            normalize_to: None,
            twist: None,
        }
    }
}

/// Hyperbolic boost pair generating a Schottky group in SO(2,1) ⊂ SL(3,ℝ):
/// translations along orthogonal axes of the hyperbolic plane.
pub fn schottky_so21(t: f64) -> MatrixGroupSpec {
    let a = Mat::from_rows(vec![
        vec![t.cosh(), 0.0, t.sinh()],
        vec![0.0, 1.0, 0.0],
        vec![t.sinh(), 0.0, t.cosh()],
    ])
    .expect("3x3");
    let b = Mat::from_rows(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, t.cosh(), t.sinh()],
        vec![0.0, t.sinh(), t.cosh()],
    ])
    .expect("3x3");
    MatrixGroupSpec::new(3, vec![a, b], 1e-9).expect("boost generators")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::{involution_action, position_space, sphere_data};
    use crate::ideal::{enumerate_balanced, is_balanced};
    use crate::weyl::GroupContext;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reduced_word_counts() {
        assert_eq!(reduced_words(2, 1).len(), 4);
        assert_eq!(reduced_words(2, 2).len(), 16);
        assert_eq!(reduced_words(1, 3).len(), 6);
        for w in reduced_words(3, 4) {
            for pair in w.windows(2) {
                assert_ne!(pair[0], -pair[1]);
            }
        }
        // Cyclically reduced: drop words like a b a⁻¹.
        let cyc = cyclically_reduced_words(2, 3);
        assert!(cyc.iter().all(|w| w.len() < 2 || w[0] != -w[w.len() - 1]));
        assert!(cyc.len() < reduced_words(2, 3).len());
    }

    #[test]
    fn attracting_flag_of_diagonal() {
        let g = Mat::from_rows(vec![
            vec![4.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.25],
        ])
        .unwrap();
        let f = attracting_flag(&g, 100, 1e-12).unwrap();
        assert!(f.dist(&OrientedFlag::identity(3)) < 1e-10);
    }

    /// Distance to the closest right sign twist: lifts of the same
    /// unoriented flag differ by the right sign-group action.
    fn dist_mod_signs(a: &OrientedFlag, b: &OrientedFlag) -> f64 {
        let c = GroupContext::new(a.n(), false).unwrap();
        c.mbar_elements()
            .iter()
            .map(|m| a.dist(&b.twist(m)))
            .fold(f64::MAX, f64::min)
    }

    #[test]
    fn attracting_flag_of_conjugated_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = Mat::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            if h.det() < 0.1 {
                continue;
            }
            let d = Mat::from_rows(vec![
                vec![4.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.25],
            ])
            .unwrap();
            let g = h.mul(&d).mul(&h.inverse(1e-12).unwrap());
            let f = attracting_flag(&g, 500, 1e-11).unwrap();
            // The eigenbasis flag, up to the orientation lift of each part.
            let expect = canonicalize(&h, 1e-12).unwrap();
            assert!(
                dist_mod_signs(&f, &expect) < 1e-7,
                "attracting flag should be the eigenbasis flag"
            );
        }
    }

    #[test]
    fn attracting_flag_equivariance_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = schottky_so21(2.0);
        let g = spec.evaluate(&[1, 2]);
        let f = attracting_flag(&g, 2000, 1e-12).unwrap();
        let f_sq = attracting_flag(&g.mul(&g), 2000, 1e-12).unwrap();
        assert!(f.dist(&f_sq) < 1e-8);
        for _ in 0..10 {
            let a = Mat::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            if a.det() < 0.1 {
                continue;
            }
            let conj = a.mul(&g).mul(&a.inverse(1e-12).unwrap());
            let lhs = attracting_flag(&conj, 4000, 1e-12).unwrap();
            let rhs = canonicalize(&a.mul(f.rep()), 1e-12).unwrap();
            assert!(
                dist_mod_signs(&lhs, &rhs) < 1e-6,
                "equivariance failed: {}",
                dist_mod_signs(&lhs, &rhs)
            );
        }
    }

    #[test]
    fn non_proximal_matrices_error() {
        // A rotation never converges.
        let rot = Mat::from_rows(vec![
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            attracting_flag(&rot, 200, 1e-10),
            Err(Error::NotProximal)
        ));
    }

    #[test]
    fn sample_single_generator() {
        let spec = schottky_so21(2.0);
        let single = MatrixGroupSpec::new(3, vec![spec.generator(0).clone()], 1e-9).unwrap();
        let set = sample_limit_set(&single, 1, 2000, 1e-10);
        assert_eq!(set.samples.len(), 2);
        assert_eq!(set.skipped, 0);
        // Powers share the fixed flag.
        let set3 = sample_limit_set(&single, 3, 2000, 1e-10);
        assert_eq!(set3.samples.len(), 6);
        let deduped = set3.dedup(1e-7);
        assert_eq!(deduped.samples.len(), 2);
    }

    #[test]
    fn fuchsian_samples_lie_on_the_light_cone() {
        // Word length times translation length stays within comfortable f64
        // conditioning here; deeper words would be skipped legitimately.
        let spec = schottky_so21(2.0);
        let set = sample_limit_set(&spec, 4, 4000, 1e-9);
        assert!(set.skipped == 0, "boosts are proximal, {} skipped", set.skipped);
        assert!(set.samples.len() > 20);
        for s in &set.samples {
            let v = s.flag.rep().col(0);
            let q = v[0] * v[0] + v[1] * v[1] - v[2] * v[2];
            assert!(q.abs() < 1e-6, "attracting line off the cone: {q}");
        }
    }

    fn sphere_setup() -> (PositionSpace, Ideal, Ideal, usize, usize) {
        // Returns (space, ideal containing mid+, ideal containing mid-,
        // class of +e2-line, bottom class).
        let c = GroupContext::new(3, false).unwrap();
        let (r, s, w0) = sphere_data(&c).unwrap();
        let space = position_space(&c, &r, &s);
        let action = involution_action(&space, &w0).unwrap();
        let census = enumerate_balanced(&space, &action);
        assert_eq!(census.count(), 2);
        // Class of the position with first column +e2.
        let mid_plus = space.class_of(&"+2 +3 +1".parse().unwrap());
        let bottom = space.class_of(&space.ctx().identity());
        let (with_plus, without_plus): (Vec<_>, Vec<_>) = census
            .ideals()
            .iter()
            .cloned()
            .partition(|i| i.contains(mid_plus));
        (
            space,
            with_plus[0].clone(),
            without_plus[0].clone(),
            mid_plus,
            bottom,
        )
    }

    #[test]
    fn k_membership_on_reference_flag() {
        let (space, ideal_plus, ideal_minus, _, bottom) = sphere_setup();
        let samples = vec![LimitSample {
            word: vec![],
            flag: OrientedFlag::identity(3),
        }];
        let tol = 1e-9;
        // +e2 is in the positive half of f^(2) w.r.t. f^(1).
        let plus = OrientedSubspace::line(&[0.0, 1.0, 0.0], tol).unwrap();
        assert!(k_membership(&plus, &samples, &ideal_plus, &space, tol).unwrap());
        assert!(!k_membership(&plus, &samples, &ideal_minus, &space, tol).unwrap());
        // -e2: the other half.
        let minus = OrientedSubspace::line(&[0.0, -1.0, 0.0], tol).unwrap();
        assert!(!k_membership(&minus, &samples, &ideal_plus, &space, tol).unwrap());
        assert!(k_membership(&minus, &samples, &ideal_minus, &space, tol).unwrap());
        // The attracting line itself: bottom class, inside both ideals.
        let line = OrientedSubspace::line(&[1.0, 0.0, 0.0], tol).unwrap();
        assert!(ideal_plus.contains(bottom));
        assert!(k_membership(&line, &samples, &ideal_plus, &space, tol).unwrap());
        assert!(k_membership(&line, &samples, &ideal_minus, &space, tol).unwrap());
        // A transverse point in the open top stratum: outside both.
        let top = OrientedSubspace::line(&[0.0, 0.0, 1.0], tol).unwrap();
        assert!(!k_membership(&top, &samples, &ideal_plus, &space, tol).unwrap());
        assert!(!k_membership(&top, &samples, &ideal_minus, &space, tol).unwrap());
    }

    #[test]
    fn empty_sample_list_renders_all_light() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let img = render_from_samples(&[], &ideal_plus, &space, 16, 8, 1e-9).unwrap();
        assert!(img.pixels.iter().all(|&b| b == 255));
    }

    #[test]
    fn rank_one_fuchsian_removes_two_half_circles() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let spec = schottky_so21(2.0);
        let single = MatrixGroupSpec::new(3, vec![spec.generator(0).clone()], 1e-9).unwrap();
        let set = sample_limit_set(&single, 1, 4000, 1e-11);
        assert_eq!(set.samples.len(), 2);
        let (w, h) = (120, 60);
        let band = std::f64::consts::PI / h as f64;
        let img = render_from_samples(&set.samples, &ideal_plus, &space, w, h, band).unwrap();

        // Analytic picture: writing a direction in a sample's frame as
        // coefficients (c1, c2, c3), the pixel is dark exactly when
        // |c3| <= band (on the tangent circle within tolerance) and either
        // c2 > band (positive half) or |c2| <= band (circle endpoints).
        let margin = 0.2 * band;
        let mut dark_expected = 0;
        let mut checked = 0;
        for y in 0..h {
            for x in 0..w {
                let dir = pixel_direction(x, y, w, h);
                let mut analytic = false;
                let mut ambiguous = false;
                for s in &set.samples {
                    let f = s.flag.rep();
                    let c: Vec<f64> = (0..3)
                        .map(|j| (0..3).map(|i| dir[i] * f[(i, j)]).sum::<f64>())
                        .collect();
                    if (c[2].abs() - band).abs() < margin || (c[1].abs() - band).abs() < margin {
                        ambiguous = true;
                    }
                    if c[2].abs() <= band && (c[1] > band || c[1].abs() <= band) {
                        analytic = true;
                    }
                }
                if ambiguous {
                    continue;
                }
                checked += 1;
                if analytic {
                    dark_expected += 1;
                }
                assert_eq!(
                    img.get(x, y) == DARK,
                    analytic,
                    "pixel ({x},{y}) direction {dir:?}"
                );
            }
        }
        assert!(checked > w * h / 2, "analytic check covered too few pixels");
        // Two half circles really show up at this resolution.
        assert!(dark_expected > 20, "expected visible half circles");
    }

    fn sphere_render_options() -> RenderOptions {
        let c = GroupContext::new(3, false).unwrap();
        RenderOptions {
            normalize_to: Some(c.antidiagonal(&[1, -1, 1]).unwrap()),
            ..RenderOptions::default()
        }
    }

    #[test]
    fn removed_set_grows_with_word_length() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let spec = schottky_so21(2.5);
        let opts = sphere_render_options();
        let (img2, _) = render_sphere(&spec, 2, &ideal_plus, &space, 60, 30, &opts).unwrap();
        let (img4, _) = render_sphere(&spec, 4, &ideal_plus, &space, 60, 30, &opts).unwrap();
        for (a, b) in img2.pixels.iter().zip(&img4.pixels) {
            // dark (0) may only appear, never disappear
            assert!(a >= b);
        }
    }

    #[test]
    fn renders_are_deterministic() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let spec = schottky_so21(2.5);
        let opts = sphere_render_options();
        let (img_a, set_a) = render_sphere(&spec, 3, &ideal_plus, &space, 40, 20, &opts).unwrap();
        let (img_b, set_b) = render_sphere(&spec, 3, &ideal_plus, &space, 40, 20, &opts).unwrap();
        assert_eq!(img_a, img_b);
        assert_eq!(set_a.samples.len(), set_b.samples.len());
    }

    #[test]
    fn removed_fibers_of_distinct_flags_are_disjoint() {
        // Slim ideals give disjoint removed fibers over samples in the
        // transversality-type position.
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let w0 = space.ctx().antidiagonal(&[1, -1, 1]).unwrap();
        let action = involution_action(&space, &w0).unwrap();
        assert!(is_balanced(&space, &action, &ideal_plus).unwrap());
        let spec = schottky_so21(2.5);
        let tol = 1e-9;
        let set = sample_limit_set(&spec, 3, 4000, 1e-11)
            .dedup(1e-7)
            .normalize_transversality(space.ctx(), &w0, tol)
            .unwrap();
        let samples = &set.samples;
        let w0_class = space.class_of(&w0);
        // Check disjointness on a coarse grid for pairs at position ⟦w0⟧.
        let mut pairs = Vec::new();
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                let pos = crate::flag::relative_position(
                    &samples[i].flag,
                    &samples[j].flag,
                    &space,
                    tol,
                );
                if pos.ok() == Some(w0_class) {
                    pairs.push((i, j));
                }
                if pairs.len() >= 10 {
                    break;
                }
            }
            if pairs.len() >= 10 {
                break;
            }
        }
        assert!(!pairs.is_empty());
        let (w, h) = (100, 50);
        for (i, j) in pairs {
            let a = [samples[i].clone()];
            let b = [samples[j].clone()];
            for y in 0..h {
                for x in 0..w {
                    let dir = pixel_direction(x, y, w, h);
                    let p = OrientedSubspace::line(&dir, tol).unwrap();
                    let in_a = k_membership(&p, &a, &ideal_plus, &space, tol).unwrap();
                    let in_b = k_membership(&p, &b, &ideal_plus, &space, tol).unwrap();
                    assert!(!(in_a && in_b), "fibers intersect at {dir:?}");
                }
            }
        }
    }

    #[test]
    fn membership_is_group_invariant_up_to_truncation() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let w0 = space.ctx().antidiagonal(&[1, -1, 1]).unwrap();
        let spec = schottky_so21(2.5);
        let set = sample_limit_set(&spec, 5, 4000, 1e-11)
            .dedup(1e-7)
            .normalize_transversality(space.ctx(), &w0, 1e-9)
            .unwrap();
        let samples = &set.samples;
        let tol = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for gen_idx in 0..2 {
            let g = spec.generator(gen_idx);
            let mut mismatches = 0;
            let total = 200;
            for _ in 0..total {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 0.1 {
                    continue;
                }
                let p = OrientedSubspace::line(&v, tol).unwrap();
                let gv_mat = g.mul(p.basis());
                let gv = OrientedSubspace::new(gv_mat, tol).unwrap();
                let m1 = k_membership(&p, samples, &ideal_plus, &space, tol).unwrap();
                let m2 = k_membership(&gv, samples, &ideal_plus, &space, tol).unwrap();
                if m1 != m2 {
                    mismatches += 1;
                }
            }
            assert!(
                mismatches * 100 < total,
                "generator {gen_idx}: {mismatches}/{total} mismatches"
            );
        }
    }

    #[test]
    fn gnomonic_chart_agrees_with_membership() {
        let (space, ideal_plus, _, _, _) = sphere_setup();
        let spec = schottky_so21(2.0);
        let w0 = space.ctx().antidiagonal(&[1, -1, 1]).unwrap();
        let set = sample_limit_set(&spec, 2, 3000, 1e-9)
            .dedup(1e-6)
            .normalize_transversality(space.ctx(), &w0, 1e-9)
            .unwrap();
        let (w, h) = (40, 40);
        let band = 0.08;
        let img = render_chart(
            &set.samples,
            &ideal_plus,
            &space,
            w,
            h,
            band,
            Chart::Gnomonic,
            2.0,
        )
        .unwrap();
        // Spot-check pixels against direct membership with the same band.
        for (x, y) in [(0, 0), (20, 20), (7, 31), (33, 12)] {
            let dir = pixel_direction_gnomonic(x, y, w, h, 2.0);
            let p = OrientedSubspace::line(&dir, 1e-12).unwrap();
            let member =
                k_membership(&p, &set.samples, &ideal_plus, &space, band).unwrap();
            assert_eq!(img.get(x, y) == DARK, member, "pixel ({x},{y})");
        }
    }

    #[test]
    fn ppm_header_is_exact() {
        let mut img = RasterImage::new(2, 1);
        img.set(0, 0, [1, 2, 3]);
        img.set(1, 0, [4, 5, 6]);
        let mut out = Vec::new();
        img.write_ppm(&mut out).unwrap();
        assert_eq!(&out[..11], b"P6\n2 1\n255\n");
        assert_eq!(&out[11..], &[1, 2, 3, 4, 5, 6]);
    }
}
