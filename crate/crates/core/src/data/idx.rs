//! IDX files: big-endian magic, big-endian `u32` dimensions, then raw bytes.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::nn::Matrix;
use crate::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn ingestion(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let chunk = self.take(4)?;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(ingestion(
                self.path,
                format!(
                    "truncated: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.bytes.len()
                ),
            ));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32()?;
        if found != expected {
            return Err(ingestion(
                self.path,
                format!("bad magic number {found:#010x}, expected {expected:#010x}"),
            ));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(ingestion(
                self.path,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

/// Reads an image file: returns `(count, [rows, cols], pixels)`.
pub fn read_idx_images(path: &Path) -> Result<(usize, [usize; 2], Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    r.magic(IMAGES_MAGIC)?;
    let count = r.u32()? as usize;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| ingestion(path, "dimensions overflow"))?;
    let pixels = r.take(len)?.to_vec();
    r.finish()?;
    Ok((count, [rows, cols], pixels))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    r.magic(LABELS_MAGIC)?;
    let count = r.u32()? as usize;
    let labels = r.take(count)?.to_vec();
    r.finish()?;
    Ok(labels)
}

/// Loads an image/label IDX pair. Pixels are scaled by `1/255`; the class
/// count is one past the largest label.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
    let (count, dims, pixels) = read_idx_images(images)?;
    let raw_labels = read_idx_labels(labels)?;
    if raw_labels.len() != count {
        return Err(ingestion(
            labels,
            format!(
                "{} labels but {} has {count} images",
                raw_labels.len(),
                images.display()
            ),
        ));
    }
    if count == 0 || dims[0] * dims[1] == 0 {
        return Err(ingestion(images, "no samples or zero-sized images"));
    }
    let width = dims[0] * dims[1];
    let features = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&l| usize::from(l)).collect();
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    Dataset::with_image_dims(
        Matrix::from_vec(count, width, features)?,
        labels,
        classes,
        dims,
    )
}

/// Writes `ds` as an IDX pair. Every feature must be exactly `k/255` for an
/// integer `k`, otherwise the write is refused rather than silently rounded.
pub fn write_idx(ds: &Dataset, images: &Path, labels: &Path) -> Result<()> {
    let [rows, cols] = ds.image_dims();
    let mut img = Vec::with_capacity(16 + ds.len() * ds.dims());
    img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for v in [ds.len(), rows, cols] {
        img.extend_from_slice(&dim(v, images)?.to_be_bytes());
    }
    for &v in ds.features().as_slice() {
        let k = (v * 255.0).round();
        if !(0.0..=255.0).contains(&k) || k / 255.0 != v {
            return Err(Error::Domain(format!(
                "feature {v} is not representable as a byte/255 pixel"
            )));
        }
        img.push(k as u8);
    }

    let mut lab = Vec::with_capacity(8 + ds.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&dim(ds.len(), labels)?.to_be_bytes());
    for &y in ds.labels() {
        lab.push(u8::try_from(y).map_err(|_| Error::Domain(format!("label {y} exceeds a byte")))?);
    }

    fs::write(images, img).map_err(|e| Error::io(images, e))?;
    fs::write(labels, lab).map_err(|e| Error::io(labels, e))?;
    Ok(())
}

fn dim(v: usize, path: &Path) -> Result<u32> {
    u32::try_from(v).map_err(|_| ingestion(path, format!("dimension {v} exceeds u32")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;

    fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, bytes).unwrap();
        p
    }

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn hand_built_pair_scales_by_255() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = header(IMAGES_MAGIC, &[2, 2, 2]);
        img.extend_from_slice(&[0, 255, 128, 64, 1, 2, 3, 4]);
        let mut lab = header(LABELS_MAGIC, &[2]);
        lab.extend_from_slice(&[3, 1]);
        let ds = load_idx(
            &write_bytes(dir.path(), "i", &img),
            &write_bytes(dir.path(), "l", &lab),
        )
        .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.image_dims(), [2, 2]);
        assert_eq!(
            ds.features().row(0),
            &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]
        );
        assert!((ds.features().get(0, 2) - 0.50196).abs() < 1e-5);
        assert!((ds.features().get(0, 3) - 0.25098).abs() < 1e-5);
        assert_eq!(ds.labels(), &[3, 1]);
        assert_eq!(ds.classes(), 4);
    }

    #[test]
    fn wrong_magic_is_rejected_with_file_name() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = header(IMAGES_MAGIC, &[1, 1, 1]);
        img.push(7);
        let lab = header(0x0000_0802, &[0]);
        let img_path = write_bytes(dir.path(), "img", &img);
        let lab_path = write_bytes(dir.path(), "bad-labels", &lab);
        let err = load_idx(&img_path, &lab_path).unwrap_err().to_string();
        assert!(err.contains("bad-labels") && err.contains("magic"), "{err}");
        // Swapped files: each magic is wrong for its role.
        assert!(load_idx(&lab_path, &img_path).is_err());
    }

    #[test]
    fn truncation_and_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = header(IMAGES_MAGIC, &[2, 1, 2]);
        img.extend_from_slice(&[1, 2, 3]);
        let mut lab = header(LABELS_MAGIC, &[2]);
        lab.extend_from_slice(&[0, 1]);
        let i = write_bytes(dir.path(), "short-images", &img);
        let l = write_bytes(dir.path(), "labels", &lab);
        let err = load_idx(&i, &l).unwrap_err().to_string();
        assert!(
            err.contains("short-images") && err.contains("truncated"),
            "{err}"
        );

        img.push(4);
        let i = write_bytes(dir.path(), "images", &img);
        let mut lab = header(LABELS_MAGIC, &[1]);
        lab.push(0);
        let l = write_bytes(dir.path(), "one-label", &lab);
        let err = load_idx(&i, &l).unwrap_err().to_string();
        assert!(err.contains("one-label"), "{err}");
    }

    #[test]
    fn off_grid_features_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset::new(Matrix::from_vec(1, 1, vec![0.3]).unwrap(), vec![0], 1).unwrap();
        assert!(write_idx(&ds, &dir.path().join("i"), &dir.path().join("l")).is_err());
    }

    #[test]
    fn synthetic_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = gen_synthetic(3, 4, 5, 0.2, 8).unwrap();
        let (i, l) = (dir.path().join("i"), dir.path().join("l"));
        write_idx(&ds, &i, &l).unwrap();
        assert_eq!(load_idx(&i, &l).unwrap(), ds);
    }
}
