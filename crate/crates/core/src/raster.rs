//! Row-major image containers and the PGM / CSV formats used to move them
//! on and off disk.
//!
//! Every raster in the crate indexes pixel `(x, y)` at `y * width + x`, with
//! the origin in the top-left corner, `x` growing rightward and `y` downward.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A dense two-dimensional raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit single-channel photomicrograph.
pub type GrayImage = Raster<u8>;
/// Foreground (`true`) / background (`false`) mask.
pub type BinaryImage = Raster<bool>;
/// Region ids; 0 is background.
pub type LabelImage = Raster<u32>;

impl<T: Clone> Raster<T> {
    /// A `width` x `height` raster filled with `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width >= 1 && height >= 1, "raster dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T: Clone + Default> Raster<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::default())
    }
}

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyRaster);
        }
        if data.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    /// Builds a raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width >= 1 && height >= 1, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        let i = self.index(x, y);
        self.data[i] = value;
    }

    /// Signed-coordinate lookup; `None` outside the image.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> Option<&T> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(&self.data[y as usize * self.width + x as usize])
        }
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_shape<U>(&self, other: &Raster<U>) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (other.width, other.height),
            })
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn map_indexed<U>(&self, mut f: impl FnMut(usize, &T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().enumerate().map(|(i, v)| f(i, v)).collect(),
        }
    }

    /// Indices of the (up to eight) neighbours of pixel `idx`.
    #[inline]
    pub fn neighbors8(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (w, h) = (self.width as i64, self.height as i64);
        let (x, y) = ((idx % self.width) as i64, (idx / self.width) as i64);
        NEIGHBORS8.iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            (nx >= 0 && ny >= 0 && nx < w && ny < h).then_some((ny * w + nx) as usize)
        })
    }
}

/// Offsets of the 8-neighbourhood in raster-scan order.
pub(crate) const NEIGHBORS8: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

impl BinaryImage {
    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryImage {
        self.map(|&b| !b)
    }

    /// `true` when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.same_shape(other) && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

impl LabelImage {
    /// Foreground mask of nonzero labels.
    pub fn mask(&self) -> BinaryImage {
        self.map(|&l| l != 0)
    }

    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Number of distinct nonzero labels.
    pub fn count_regions(&self) -> usize {
        let mut seen = vec![false; self.max_label() as usize + 1];
        let mut n = 0;
        for &l in &self.data {
            if l != 0 && !seen[l as usize] {
                seen[l as usize] = true;
                n += 1;
            }
        }
        n
    }

    /// Renumbers labels to `1..=N` in raster-scan order of first occurrence.
    pub fn relabel_sequential(&self) -> LabelImage {
        let mut map = vec![0u32; self.max_label() as usize + 1];
        let mut next = 0u32;
        self.map(|&l| {
            if l == 0 {
                return 0;
            }
            let slot = &mut map[l as usize];
            if *slot == 0 {
                next += 1;
                *slot = next;
            }
            *slot
        })
    }

    /// Pixel count per label, indexed by label (index 0 is background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.max_label() as usize + 1];
        for &l in &self.data {
            areas[l as usize] += 1;
        }
        areas
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;

    // Whitespace and `#` comments may separate header tokens.
    let next_token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::MalformedHeader("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let number = |tok: String, what: &str| -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("invalid {what} {tok:?}")))
    };

    let magic = next_token(&mut pos)?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::MalformedHeader(format!("unsupported magic {other:?}"))),
    };
    let width = number(next_token(&mut pos)?, "width")?;
    let height = number(next_token(&mut pos)?, "height")?;
    let maxval = number(next_token(&mut pos)?, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image dimension".into()));
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader("maxval must be positive".into()));
    }
    if maxval > 255 {
        return Err(Error::MaxvalUnsupported(maxval));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("image dimensions overflow".into()))?;

    let data = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        pos += 1;
        let payload = bytes.get(pos..).unwrap_or(&[]);
        if payload.len() < n {
            return Err(Error::TruncatedPayload {
                expected: n,
                actual: payload.len(),
            });
        }
        payload[..n].to_vec()
    } else {
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let tok = match next_token(&mut pos) {
                Ok(t) => t,
                Err(_) => {
                    return Err(Error::TruncatedPayload {
                        expected: n,
                        actual: data.len(),
                    })
                }
            };
            let v = tok
                .parse::<usize>()
                .map_err(|_| Error::MalformedHeader(format!("invalid sample {tok:?}")))?;
            if v > maxval {
                return Err(Error::MalformedHeader(format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
        data
    };
    GrayImage::from_vec(width, height, data)
}

/// Reads a P5 (binary) or P2 (ASCII) PGM with maxval at most 255.
///
/// Samples are returned as stored; no rescaling to the 0..=255 range is done.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|e| e.in_file(path))
}

/// Parses PGM bytes already in memory.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    parse_pgm(bytes)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Writes `img` as binary PGM (`P5`, maxval 255).
pub fn write_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_label_csv(labels: &LabelImage) -> String {
    let mut out = String::with_capacity(labels.len() * 2);
    for row in labels.data().chunks(labels.width()) {
        for (i, l) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{l}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes one CSV row per image row, LF terminated, no header.
pub fn write_label_csv(labels: &LabelImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(encode_label_csv(labels).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Reads a label map written by [`write_label_csv`].
pub fn read_label_csv(path: impl AsRef<Path>) -> Result<LabelImage> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_label_csv(&text).map_err(|e| e.in_file(path))
}

pub fn decode_label_csv(text: &str) -> Result<LabelImage> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    for (row, record) in reader.records().enumerate() {
        let line = row + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {w} cells, found {}", record.len()),
                })
            }
            _ => {}
        }
        for cell in record.iter() {
            let v = cell.trim().parse::<u32>().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid label {cell:?}"),
            })?;
            data.push(v);
        }
        height += 1;
    }
    let width = width.ok_or(Error::EmptyRaster)?;
    LabelImage::from_vec(width, height, data)
}
