//! MOT Challenge sequence directories: `gt/gt.txt`, `det/det.txt` and
//! `seqinfo.ini`.
//!
//! gt line:  `frame,id,left,top,width,height,1,class,visibility`
//! det line: `frame,-1,left,top,width,height,conf,-1,-1,-1`
//!
//! Floats are written with two decimals. Hypothesis files produced by the
//! trackers use the gt grammar with class 1 and visibility 1.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bbox::BBox2D;
use crate::sensor::{Detection, GtEntry, ObjectClass, IMAGE_HEIGHT, IMAGE_WIDTH};

#[derive(Debug, Error)]
pub enum MotError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("missing file {0}")]
    Missing(PathBuf),
    #[error("invalid sequence: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MotError + '_ {
    move |source| MotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceMeta {
    pub name: String,
    pub frame_rate: u32,
    pub seq_length: u32,
    pub im_width: u32,
    pub im_height: u32,
    pub im_ext: String,
    pub im_dir: String,
}

impl SequenceMeta {
    pub fn new(name: impl Into<String>, frame_rate: u32, seq_length: u32) -> Self {
        Self {
            name: name.into(),
            frame_rate,
            seq_length,
            im_width: IMAGE_WIDTH,
            im_height: IMAGE_HEIGHT,
            im_ext: ".jpg".into(),
            im_dir: "img1".into(),
        }
    }

    pub fn validate(&self) -> Result<(), MotError> {
        if self.seq_length < 1 {
            return Err(MotError::Invalid("seqLength must be >= 1".into()));
        }
        if self.frame_rate == 0 {
            return Err(MotError::Invalid("frameRate must be > 0".into()));
        }
        Ok(())
    }

    pub fn to_ini(&self) -> String {
        format!(
            "[Sequence]\nname={}\nimDir={}\nframeRate={}\nseqLength={}\nimWidth={}\nimHeight={}\nimExt={}\n",
            self.name, self.im_dir, self.frame_rate, self.seq_length, self.im_width, self.im_height, self.im_ext
        )
    }

    pub fn parse_ini(text: &str, file: &Path) -> Result<Self, MotError> {
        let err = |line: usize, message: String| MotError::Parse {
            file: file.to_path_buf(),
            line,
            message,
        };
        let mut in_section = false;
        let mut fields: [Option<(usize, String)>; 7] = Default::default();
        const KEYS: [&str; 7] = [
            "name",
            "imDir",
            "frameRate",
            "seqLength",
            "imWidth",
            "imHeight",
            "imExt",
        ];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with(';') || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                in_section = line == "[Sequence]";
                continue;
            }
            if !in_section {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected key=value, got `{line}`")))?;
            if let Some(slot) = KEYS.iter().position(|key| *key == k.trim()) {
                fields[slot] = Some((i + 1, v.trim().to_string()));
            }
        }
        let get = |slot: usize| {
            fields[slot]
                .clone()
                .ok_or_else(|| err(0, format!("missing key {}", KEYS[slot])))
        };
        let num = |slot: usize| -> Result<u32, MotError> {
            let (line, v) = get(slot)?;
            v.parse()
                .map_err(|_| err(line, format!("{} is not an integer: `{v}`", KEYS[slot])))
        };
        let meta = Self {
            name: get(0)?.1,
            im_dir: get(1)?.1,
            frame_rate: num(2)?,
            seq_length: num(3)?,
            im_width: num(4)?,
            im_height: num(5)?,
            im_ext: get(6)?.1,
        };
        meta.validate()?;
        Ok(meta)
    }
}

/// Two-decimal formatting that never prints `-0.00`.
fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn gt_line(e: &GtEntry) -> String {
    let b = &e.bbox;
    format!(
        "{},{},{},{},{},{},1,{},{}",
        e.frame,
        e.object_id,
        fmt2(b.left),
        fmt2(b.top),
        fmt2(b.width),
        fmt2(b.height),
        e.class.label(),
        fmt2(e.visibility)
    )
}

pub fn det_line(d: &Detection) -> String {
    let b = &d.bbox;
    format!(
        "{},-1,{},{},{},{},{},-1,-1,-1",
        d.frame,
        fmt2(b.left),
        fmt2(b.top),
        fmt2(b.width),
        fmt2(b.height),
        fmt2(d.conf)
    )
}

/// Checks that entries are strictly increasing in `(frame, id)`.
pub fn validate_gt(gt: &[GtEntry]) -> Result<(), MotError> {
    for w in gt.windows(2) {
        let (a, b) = ((w[0].frame, w[0].object_id), (w[1].frame, w[1].object_id));
        if a == b {
            return Err(MotError::Invalid(format!("duplicate (frame, id) {a:?}")));
        }
        if a > b {
            return Err(MotError::Invalid(format!(
                "(frame, id) {b:?} follows {a:?}"
            )));
        }
    }
    if let Some(e) = gt.iter().find(|e| e.frame == 0) {
        return Err(MotError::Invalid(format!("frame 0 for id {}", e.object_id)));
    }
    Ok(())
}

pub fn format_gt(gt: &[GtEntry]) -> String {
    let mut s = String::with_capacity(gt.len() * 48);
    for e in gt {
        let _ = writeln!(s, "{}", gt_line(e));
    }
    s
}

pub fn format_det(det: &[Detection]) -> String {
    let mut s = String::with_capacity(det.len() * 48);
    for d in det {
        let _ = writeln!(s, "{}", det_line(d));
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), MotError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

/// Writes a complete sequence directory.
pub fn write_sequence(
    dir: &Path,
    meta: &SequenceMeta,
    gt: &[GtEntry],
    det: &[Detection],
) -> Result<(), MotError> {
    meta.validate()?;
    validate_gt(gt)?;
    let last = gt
        .iter()
        .map(|e| e.frame)
        .chain(det.iter().map(|d| d.frame))
        .max()
        .unwrap_or(0);
    if last > meta.seq_length {
        return Err(MotError::Invalid(format!(
            "frame {last} exceeds seqLength {}",
            meta.seq_length
        )));
    }
    write_file(&dir.join("seqinfo.ini"), &meta.to_ini())?;
    write_file(&dir.join("gt").join("gt.txt"), &format_gt(gt))?;
    write_file(&dir.join("det").join("det.txt"), &format_det(det))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String, MotError> {
    if !path.is_file() {
        return Err(MotError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(io_err(path))
}

struct LineCtx<'a> {
    file: &'a Path,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, message: impl Into<String>) -> MotError {
        MotError::Parse {
            file: self.file.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn float(&self, s: &str, what: &str) -> Result<f64, MotError> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("{what} is not a number: `{s}`")))
    }

    fn int(&self, s: &str, what: &str) -> Result<i64, MotError> {
        let t = s.trim();
        t.parse::<i64>()
            .or_else(|_| {
                // MOT files written by other tools sometimes carry integral floats
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && v.is_finite())
                    .map(|v| v as i64)
                    .ok_or(())
            })
            .map_err(|_| self.err(format!("{what} is not an integer: `{s}`")))
    }

    fn bbox(&self, f: &[&str]) -> Result<BBox2D, MotError> {
        let b = BBox2D::new(
            self.float(f[0], "left")?,
            self.float(f[1], "top")?,
            self.float(f[2], "width")?,
            self.float(f[3], "height")?,
        );
        if !b.is_valid() {
            return Err(self.err("box width and height must be positive"));
        }
        Ok(b)
    }

    fn frame(&self, s: &str) -> Result<u32, MotError> {
        let f = self.int(s, "frame")?;
        u32::try_from(f)
            .ok()
            .filter(|f| *f >= 1)
            .ok_or_else(|| self.err(format!("frame must be >= 1, got {f}")))
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses gt (or hypothesis) text. Entries must be sorted by `(frame, id)`.
pub fn parse_gt(text: &str, file: &Path) -> Result<Vec<GtEntry>, MotError> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let ctx = LineCtx { file, line };
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 9 {
            return Err(ctx.err(format!("expected 9 fields, found {}", f.len())));
        }
        let id = ctx.int(f[1], "id")?;
        let object_id = u32::try_from(id)
            .ok()
            .filter(|i| *i >= 1)
            .ok_or_else(|| ctx.err(format!("id must be positive, got {id}")))?;
        let label = ctx.int(f[7], "class")?;
        let class = u32::try_from(label)
            .ok()
            .and_then(ObjectClass::from_label)
            .ok_or_else(|| ctx.err(format!("unsupported class {label}")))?;
        let visibility = ctx.float(f[8], "visibility")?;
        if !(0.0..=1.0).contains(&visibility) {
            return Err(ctx.err("visibility must be in [0, 1]"));
        }
        ctx.int(f[6], "conf")?;
        let e = GtEntry {
            frame: ctx.frame(f[0])?,
            object_id,
            bbox: ctx.bbox(&f[2..6])?,
            class,
            visibility,
            depth: 0.0,
        };
        if let Some(prev) = out.last() {
            let prev: &GtEntry = prev;
            if (prev.frame, prev.object_id) >= (e.frame, e.object_id) {
                return Err(ctx.err(format!(
                    "(frame, id) ({}, {}) is duplicate or out of order",
                    e.frame, e.object_id
                )));
            }
        }
        out.push(e);
    }
    Ok(out)
}

pub fn parse_det(text: &str, file: &Path) -> Result<Vec<Detection>, MotError> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let ctx = LineCtx { file, line };
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 10 && f.len() != 7 {
            return Err(ctx.err(format!("expected 10 fields, found {}", f.len())));
        }
        let d = Detection {
            frame: ctx.frame(f[0])?,
            bbox: ctx.bbox(&f[2..6])?,
            conf: ctx.float(f[6], "conf")?,
        };
        if out.last().is_some_and(|p: &Detection| p.frame > d.frame) {
            return Err(ctx.err("frames out of order"));
        }
        out.push(d);
    }
    Ok(out)
}

pub fn read_gt_file(path: &Path) -> Result<Vec<GtEntry>, MotError> {
    parse_gt(&read_text(path)?, path)
}

pub fn read_det_file(path: &Path) -> Result<Vec<Detection>, MotError> {
    parse_det(&read_text(path)?, path)
}

pub fn write_det_file(path: &Path, det: &[Detection]) -> Result<(), MotError> {
    write_file(path, &format_det(det))
}

/// Writes tracker output in the gt grammar.
pub fn write_gt_file(path: &Path, gt: &[GtEntry]) -> Result<(), MotError> {
    validate_gt(gt)?;
    write_file(path, &format_gt(gt))
}

pub fn read_meta(dir: &Path) -> Result<SequenceMeta, MotError> {
    let path = dir.join("seqinfo.ini");
    SequenceMeta::parse_ini(&read_text(&path)?, &path)
}

pub fn read_sequence(dir: &Path) -> Result<(SequenceMeta, Vec<GtEntry>, Vec<Detection>), MotError> {
    let meta = read_meta(dir)?;
    let gt = read_gt_file(&dir.join("gt").join("gt.txt"))?;
    let det = read_det_file(&dir.join("det").join("det.txt"))?;
    Ok((meta, gt, det))
}

/// Groups per-frame records into `n_frames` buckets (frame `f` at index `f - 1`).
pub fn by_frame<T: Copy>(items: &[T], frame_of: impl Fn(&T) -> u32, n_frames: u32) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new(); n_frames as usize];
    for it in items {
        let f = frame_of(it) as usize;
        if f >= 1 && f <= out.len() {
            out[f - 1].push(*it);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry() -> GtEntry {
        GtEntry {
            frame: 1,
            object_id: 1,
            bbox: BBox2D::new(10.5, 20.25, 30.0, 60.0),
            class: ObjectClass::Pedestrian,
            visibility: 1.0,
            depth: 4.0,
        }
    }

    #[test]
    fn gt_line_grammar() {
        assert_eq!(gt_line(&entry()), "1,1,10.50,20.25,30.00,60.00,1,1,1.00");
    }

    #[test]
    fn negative_zero_is_normalized() {
        let mut e = entry();
        e.bbox.left = -0.001;
        assert!(gt_line(&e).starts_with("1,1,0.00,"));
    }

    #[test]
    fn det_line_parses() {
        let d = parse_det(
            "3,-1,5.00,5.00,10.00,10.00,0.30,-1,-1,-1\n",
            Path::new("det.txt"),
        )
        .unwrap();
        assert_eq!(
            d,
            vec![Detection {
                frame: 3,
                bbox: BBox2D::new(5.0, 5.0, 10.0, 10.0),
                conf: 0.3
            }]
        );
    }

    #[test]
    fn short_gt_line_reports_position() {
        let text = "1,1,10.50,20.25,30.00,60.00,1,1,1.00\n2,1,1,2,3\n";
        match parse_gt(text, Path::new("gt.txt")) {
            Err(MotError::Parse { file, line, .. }) => {
                assert_eq!(file, Path::new("gt.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let e = entry();
        assert!(validate_gt(&[e, e]).is_err());
        let mut later = e;
        later.frame = 2;
        assert!(validate_gt(&[later, e]).is_err());
        assert!(validate_gt(&[e, later]).is_ok());
    }

    #[test]
    fn seqinfo_layout() {
        let ini = SequenceMeta::new("square-sun-n10-s1-cam1", 25, 750).to_ini();
        assert_eq!(
            ini,
            "[Sequence]\nname=square-sun-n10-s1-cam1\nimDir=img1\nframeRate=25\nseqLength=750\n\
imWidth=800\nimHeight=600\nimExt=.jpg\n"
        );
        assert_eq!(
            SequenceMeta::parse_ini(&ini, Path::new("seqinfo.ini")).unwrap(),
            SequenceMeta::new("square-sun-n10-s1-cam1", 25, 750)
        );
    }
}
