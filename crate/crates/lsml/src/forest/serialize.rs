//! Binary forest tables.
//!
//! Little-endian layout: magic `FRST`, hyperparameters, matrix shape, then
//! per tree a node count followed by `(feature i32, value f64, left u32,
//! right u32)` records. Value bits are preserved exactly, so
//! write -> read -> write is byte-identical.

use std::io::{Read, Write};

use super::tree::{Node, RegressionTree};
use super::{Forest, ForestParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FRST";

pub fn write_forest(w: &mut impl Write, forest: &Forest) -> Result<()> {
    w.write_all(MAGIC)?;
    let p = forest.params();
    w.write_all(&(p.n_trees as u32).to_le_bytes())?;
    w.write_all(&p.max_features.map_or(-1i64, |v| v as i64).to_le_bytes())?;
    w.write_all(&(p.min_samples_leaf as u32).to_le_bytes())?;
    w.write_all(&p.max_depth.map_or(-1i64, |v| v as i64).to_le_bytes())?;
    w.write_all(&p.seed.to_le_bytes())?;
    w.write_all(&(forest.n_cols() as u32).to_le_bytes())?;
    w.write_all(&(forest.n_rows() as u64).to_le_bytes())?;
    for tree in forest.trees() {
        w.write_all(&(tree.nodes.len() as u32).to_le_bytes())?;
        for node in &tree.nodes {
            w.write_all(&node.feature.to_le_bytes())?;
            w.write_all(&node.value.to_le_bytes())?;
            w.write_all(&node.left.to_le_bytes())?;
            w.write_all(&node.right.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_i32(r: &mut impl Read) -> Result<i32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(i32::from_le_bytes(b))
}

fn read_i64(r: &mut impl Read) -> Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_forest(r: &mut impl Read) -> Result<Forest> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad forest table magic".into()));
    }
    let n_trees = read_u32(r)? as usize;
    let max_features = match read_i64(r)? {
        -1 => None,
        v if v >= 0 => Some(v as usize),
        v => return Err(Error::Format(format!("bad max_features {v}"))),
    };
    let min_samples_leaf = read_u32(r)? as usize;
    let max_depth = match read_i64(r)? {
        -1 => None,
        v if v >= 0 => Some(v as usize),
        v => return Err(Error::Format(format!("bad max_depth {v}"))),
    };
    let seed = read_u64(r)?;
    let n_cols = read_u32(r)? as usize;
    let n_rows = read_u64(r)? as usize;

    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_nodes = read_u32(r)? as usize;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let feature = read_i32(r)?;
            let value = read_f64(r)?;
            let left = read_u32(r)?;
            let right = read_u32(r)?;
            if feature >= 0 {
                if feature as usize >= n_cols {
                    return Err(Error::Format(format!("split feature {feature} out of range")));
                }
                if left as usize >= n_nodes || right as usize >= n_nodes {
                    return Err(Error::Format("child index out of range".into()));
                }
            }
            nodes.push(Node { feature, value, left, right });
        }
        if nodes.is_empty() {
            return Err(Error::Format("empty tree".into()));
        }
        trees.push(RegressionTree { nodes });
    }
    let params = ForestParams { n_trees, max_features, min_samples_leaf, max_depth, seed };
    Ok(Forest::from_parts(params, trees, n_cols, n_rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn roundtrip_is_bitwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let n = 120;
        let x: Vec<f64> = (0..n * 3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let params = ForestParams {
            n_trees: 9,
            max_features: Some(2),
            min_samples_leaf: 3,
            max_depth: Some(6),
            seed: 31,
        };
        let forest = Forest::fit(&x, 3, &y, &params).unwrap();
        let mut bytes = Vec::new();
        write_forest(&mut bytes, &forest).unwrap();
        let back = read_forest(&mut bytes.as_slice()).unwrap();
        assert_eq!(forest, back);
        let mut again = Vec::new();
        write_forest(&mut again, &back).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn bad_magic_rejected() {
        let bytes = b"NOPE".to_vec();
        assert!(read_forest(&mut bytes.as_slice()).is_err());
    }
}
