//! Deterministic synthetic phantoms.
//!
//! Each phantom is a lobed blob (a ball whose radius is perturbed by a few
//! smooth directional bumps) rendered at a chosen contrast over a zero
//! background, optionally max-combined with a matched-intensity wall slab or
//! vessel tube touching the blob, plus seeded Gaussian noise. Categories
//! control which of those difficulty modes a dataset exercises.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{BoolMask, Dims, ScalarField};

/// Number of radial perturbation lobes.
const N_LOBES: usize = 5;

/// Lobe sharpness exponent.
const LOBE_EXPONENT: f64 = 2.0;

/// Difficulty category of a phantom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    /// Plain bright blob on dark background.
    Isolated,
    /// A matched-intensity slab tangent to the blob.
    JuxtaWall,
    /// Reduced object/background contrast.
    LowContrast,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Isolated => "isolated",
            Category::JuxtaWall => "juxta_wall",
            Category::LowContrast => "low_contrast",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "isolated" => Ok(Category::Isolated),
            "juxta_wall" => Ok(Category::JuxtaWall),
            "low_contrast" => Ok(Category::LowContrast),
            other => Err(Error::Argument(format!("unknown category '{other}'"))),
        }
    }

    pub fn all() -> [Category; 3] {
        [Category::Isolated, Category::JuxtaWall, Category::LowContrast]
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generation parameters for one phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomParams {
    pub dims: Dims,
    /// Base radius drawn uniformly from this range (voxels).
    pub radius_range: (f64, f64),
    /// Radial bump amplitude as a fraction of the radius, in [0, 0.5].
    pub perturb_amp: f64,
    /// Object intensity over the zero background.
    pub contrast: f64,
    /// Additive Gaussian noise standard deviation.
    pub noise_sigma: f64,
    /// Add a matched-intensity half-space slab tangent to the blob.
    pub wall: bool,
    /// Add a matched-intensity tube tangent to the blob.
    pub vessel: bool,
    pub category: Category,
    pub seed: u64,
}

impl Default for PhantomParams {
    fn default() -> Self {
        Self {
            dims: (41, 41, 41),
            radius_range: (6.0, 12.0),
            perturb_amp: 0.25,
            contrast: 1.0,
            noise_sigma: 0.05,
            wall: false,
            vessel: false,
            category: Category::Isolated,
            seed: 0,
        }
    }
}

impl PhantomParams {
    /// Applies the difficulty mode of `category` to a copy of the template.
    pub fn for_category(&self, category: Category) -> Self {
        let mut p = self.clone();
        p.category = category;
        p.wall = matches!(category, Category::JuxtaWall);
        if category == Category::LowContrast {
            p.contrast = self.contrast * 0.4;
        }
        p
    }
}

/// One generated example.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: ScalarField,
    pub gt: BoolMask,
    pub category: Category,
    pub seed: u64,
    pub radius: f64,
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Generates one phantom; fully deterministic from `params.seed`.
pub fn generate(params: &PhantomParams) -> Result<Phantom> {
    let (ni, nj, nk) = params.dims;
    let min_dim = ni.min(nj).min(nk) as f64;
    if params.radius_range.0 > params.radius_range.1 || params.radius_range.0 <= 0.0 {
        return Err(Error::Argument(format!(
            "bad radius range {:?}",
            params.radius_range
        )));
    }
    if params.radius_range.1 > min_dim / 2.0 - 2.0 {
        return Err(Error::Argument(format!(
            "radius {} exceeds (min dim)/2 - 2 = {}",
            params.radius_range.1,
            min_dim / 2.0 - 2.0
        )));
    }
    if !(0.0..=0.5).contains(&params.perturb_amp) {
        return Err(Error::Argument("perturb_amp must lie in [0, 0.5]".into()));
    }
    if params.noise_sigma < 0.0 {
        return Err(Error::Argument("noise_sigma must be >= 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let radius = rng.random_range(params.radius_range.0..=params.radius_range.1);
    let lobes: Vec<([f64; 3], f64)> = (0..N_LOBES)
        .map(|_| (unit_vector(&mut rng), rng.random_range(-1.0..=1.0)))
        .collect();
    let amp_total: f64 = lobes.iter().map(|(_, a)| a.abs()).sum::<f64>().max(1e-9);

    let center = (
        (ni as f64 - 1.0) / 2.0,
        (nj as f64 - 1.0) / 2.0,
        (nk as f64 - 1.0) / 2.0,
    );
    // radius in a given direction: base plus bounded lobe perturbation
    let radius_at = |dir: [f64; 3]| -> f64 {
        let mut w = 0.0;
        for (axis, a) in &lobes {
            let c = dir[0] * axis[0] + dir[1] * axis[1] + dir[2] * axis[2];
            w += a * ((1.0 + c) / 2.0).powf(LOBE_EXPONENT);
        }
        radius + params.perturb_amp * radius * w / amp_total
    };

    let gt = BoolMask::from_fn(params.dims, |i, j, k| {
        let d = (
            i as f64 - center.0,
            j as f64 - center.1,
            k as f64 - center.2,
        );
        let len = (d.0 * d.0 + d.1 * d.1 + d.2 * d.2).sqrt();
        if len < 1e-9 {
            return true;
        }
        len <= radius_at([d.0 / len, d.1 / len, d.2 / len])
    })?;

    // wall: half-space tangent to the blob in a random direction
    let wall = params.wall.then(|| {
        let n = unit_vector(&mut rng);
        let offset = radius_at(n);
        (n, offset)
    });
    // vessel: tube of radius 2 touching the blob surface
    let vessel = params.vessel.then(|| {
        let toward = unit_vector(&mut rng);
        let surface = radius_at(toward);
        let point = [
            center.0 + surface * toward[0],
            center.1 + surface * toward[1],
            center.2 + surface * toward[2],
        ];
        // direction orthogonal to the contact normal
        let helper = unit_vector(&mut rng);
        let dot = helper[0] * toward[0] + helper[1] * toward[1] + helper[2] * toward[2];
        let mut t = [
            helper[0] - dot * toward[0],
            helper[1] - dot * toward[1],
            helper[2] - dot * toward[2],
        ];
        let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt().max(1e-9);
        t = [t[0] / n, t[1] / n, t[2] / n];
        (point, t)
    });

    let mut image = ScalarField::zeros(params.dims)?;
    for (i, j, k) in gt.coords() {
        let mut inside = gt.get(i, j, k);
        if !inside {
            let p = (i as f64 - center.0, j as f64 - center.1, k as f64 - center.2);
            if let Some((n, offset)) = &wall {
                if p.0 * n[0] + p.1 * n[1] + p.2 * n[2] >= *offset {
                    inside = true;
                }
            }
            if !inside {
                if let Some((point, t)) = &vessel {
                    let d = [
                        i as f64 - point[0],
                        j as f64 - point[1],
                        k as f64 - point[2],
                    ];
                    let along = d[0] * t[0] + d[1] * t[1] + d[2] * t[2];
                    let perp = [
                        d[0] - along * t[0],
                        d[1] - along * t[1],
                        d[2] - along * t[2],
                    ];
                    if (perp[0] * perp[0] + perp[1] * perp[1] + perp[2] * perp[2]).sqrt() <= 2.0 {
                        inside = true;
                    }
                }
            }
        }
        if inside {
            image.set(i, j, k, params.contrast);
        }
    }
    if params.noise_sigma > 0.0 {
        for v in image.data_mut() {
            let n: f64 = rng.sample(StandardNormal);
            *v += params.noise_sigma * n;
        }
    }

    Ok(Phantom { image, gt, category: params.category, seed: params.seed, radius })
}

/// Three disjoint example lists with per-split seed streams and categories
/// balanced round-robin across `categories`.
pub fn generate_dataset(
    n_train: usize,
    n_val: usize,
    n_test: usize,
    template: &PhantomParams,
    categories: &[Category],
    master_seed: u64,
) -> Result<(Vec<Phantom>, Vec<Phantom>, Vec<Phantom>)> {
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Argument("all split sizes must be >= 1".into()));
    }
    if categories.is_empty() {
        return Err(Error::Argument("at least one category is required".into()));
    }
    let mut splits = Vec::with_capacity(3);
    let mut lane = 0u64;
    for &count in &[n_train, n_val, n_test] {
        let mut examples = Vec::with_capacity(count);
        for idx in 0..count {
            let category = categories[idx % categories.len()];
            let mut p = template.for_category(category);
            p.seed = crate::derive_seed(master_seed, lane);
            lane += 1;
            examples.push(generate(&p)?);
        }
        splits.push(examples);
    }
    let test = splits.pop().unwrap();
    let val = splits.pop().unwrap();
    let train = splits.pop().unwrap();
    Ok((train, val, test))
}
