//! File formats: Matrix Market system matrices behind a JSON manifest,
//! reduced models as JSON, and sample sets as CSV with a JSON sidecar.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Scalar};
use crate::operator::Operator;
use crate::rom::{Method, ReducedModel};
use crate::samples::{SampleKind, SampleSet};
use crate::sparse::Csc;
use crate::system::{Realization, StateSpace, TransferFunction};

/// A matrix as stored in a Matrix Market file.
#[derive(Clone, Debug, PartialEq)]
pub enum MtxMatrix {
    /// `array` format.
    Dense(DMatrix<f64>),
    /// `coordinate` format.
    Sparse(Csc),
}

impl MtxMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MtxMatrix::Dense(m) => m.shape(),
            MtxMatrix::Sparse(s) => (s.nrows(), s.ncols()),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            MtxMatrix::Dense(m) => m.clone(),
            MtxMatrix::Sparse(s) => s.to_dense(),
        }
    }

    pub fn into_operator(self) -> Operator {
        match self {
            MtxMatrix::Dense(m) => Operator::Dense(m),
            MtxMatrix::Sparse(s) => Operator::Sparse(s),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a real, integer or pattern Matrix Market file in coordinate or
/// array layout, with general, symmetric or skew-symmetric storage.
pub fn read_mtx(path: &Path) -> Result<MtxMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate().map(|(k, l)| (k + 1, l));

    let (ln, header) = match lines.next() {
        Some((ln, l)) => (ln, l.map_err(|e| Error::io(path, e))?),
        None => return Err(parse_err(path, 1, "empty file")),
    };
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(path, ln, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(path, ln, format!("unsupported layout '{other}'"))),
    };
    let pattern = match words[3].as_str() {
        "real" | "double" | "integer" => false,
        "pattern" if coordinate => true,
        other => return Err(parse_err(path, ln, format!("unsupported field '{other}'"))),
    };
    let sym = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_err(path, ln, format!("unsupported symmetry '{other}'"))),
    };

    // data lines, comments and blanks skipped
    let mut data = lines.filter_map(|(ln, l)| match l {
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((ln, t.to_string())))
            }
        }
        Err(e) => Some(Err(Error::io(path, e))),
    });

    let (ln, size) = data
        .next()
        .ok_or_else(|| parse_err(path, ln + 1, "missing size line"))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|w| w.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, ln, format!("bad size line: {e}")))?;
    let expect = if coordinate { 3 } else { 2 };
    if dims.len() != expect {
        return Err(parse_err(path, ln, format!("size line needs {expect} integers")));
    }
    let (nr, nc) = (dims[0], dims[1]);
    if sym != Symmetry::General && nr != nc {
        return Err(parse_err(path, ln, "symmetric storage needs a square matrix"));
    }

    let num = |w: &str, ln: usize| -> Result<f64> {
        let v: f64 = w
            .parse()
            .map_err(|_| parse_err(path, ln, format!("'{w}' is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(path, ln, format!("non-finite value '{w}'")));
        }
        Ok(v)
    };

    if coordinate {
        let nnz = dims[2];
        let mut trip = Vec::with_capacity(if sym == Symmetry::General { nnz } else { 2 * nnz });
        let mut last = ln;
        for _ in 0..nnz {
            let (ln, l) = data
                .next()
                .ok_or_else(|| parse_err(path, last + 1, format!("expected {nnz} entries, file ended early")))??;
            last = ln;
            let w: Vec<&str> = l.split_whitespace().collect();
            let want = if pattern { 2 } else { 3 };
            if w.len() != want {
                return Err(parse_err(path, ln, format!("expected {want} fields, found {}", w.len())));
            }
            let idx = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| parse_err(path, ln, format!("'{s}' is not an index")))
            };
            let (i, j) = (idx(w[0])?, idx(w[1])?);
            if i == 0 || j == 0 || i > nr || j > nc {
                return Err(parse_err(path, ln, format!("index ({i}, {j}) outside {nr}x{nc}")));
            }
            let v = if pattern { 1.0 } else { num(w[2], ln)? };
            trip.push((i - 1, j - 1, v));
            if i != j {
                match sym {
                    Symmetry::General => {}
                    Symmetry::Symmetric => trip.push((j - 1, i - 1, v)),
                    Symmetry::Skew => trip.push((j - 1, i - 1, -v)),
                }
            }
        }
        if let Some(extra) = data.next() {
            let (ln, _) = extra?;
            return Err(parse_err(path, ln, format!("more than the declared {nnz} entries")));
        }
        Ok(MtxMatrix::Sparse(Csc::from_triplets(nr, nc, &trip)?))
    } else {
        // column-major; symmetric storage lists the lower triangle only
        let mut m = DMatrix::zeros(nr, nc);
        let slots: Vec<(usize, usize)> = match sym {
            Symmetry::General => (0..nc).flat_map(|j| (0..nr).map(move |i| (i, j))).collect(),
            Symmetry::Symmetric => (0..nc).flat_map(|j| (j..nr).map(move |i| (i, j))).collect(),
            Symmetry::Skew => (0..nc).flat_map(|j| (j + 1..nr).map(move |i| (i, j))).collect(),
        };
        let mut last = ln;
        for &(i, j) in &slots {
            let (ln, l) = data.next().ok_or_else(|| {
                parse_err(path, last + 1, format!("expected {} values, file ended early", slots.len()))
            })??;
            last = ln;
            let w: Vec<&str> = l.split_whitespace().collect();
            if w.len() != 1 {
                return Err(parse_err(path, ln, format!("expected 1 value, found {}", w.len())));
            }
            let v = num(w[0], ln)?;
            m[(i, j)] = v;
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::Skew => m[(j, i)] = -v,
            }
        }
        if let Some(extra) = data.next() {
            let (ln, _) = extra?;
            return Err(parse_err(path, ln, "more values than the declared size"));
        }
        Ok(MtxMatrix::Dense(m))
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    Ok(std::io::BufWriter::new(
        fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// Writes a dense matrix in `array real general` layout. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_mtx_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io)?;
    writeln!(w, "{} {}", m.nrows(), m.ncols()).map_err(io)?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            writeln!(w, "{:e}", m[(i, j)]).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Writes a sparse matrix in `coordinate real general` layout.
pub fn write_mtx_sparse(path: &Path, s: &Csc) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", s.nrows(), s.ncols(), s.nnz()).map_err(io)?;
    for (i, j, v) in s.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Manifest naming one Matrix Market file per system matrix. Relative paths
/// are resolved against the manifest's directory.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "A")]
    pub a: PathBuf,
    #[serde(rename = "B")]
    pub b: PathBuf,
    #[serde(rename = "C")]
    pub c: PathBuf,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<PathBuf>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<PathBuf>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            parse_err(path, e.line(), e.to_string())
        } else {
            Error::Schema(format!("{}: {e}", path.display()))
        }
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn shape_err(file: &Path, what: &str, got: (usize, usize), want: String) -> Error {
    Error::Dimension(format!(
        "{}: {what} is {}x{}, expected {want}",
        file.display(),
        got.0,
        got.1
    ))
}

/// Assembles a state space from a manifest. Coordinate files for `A` and
/// `E` stay sparse; `B`, `C` and `D` are held densely.
pub fn load_system(manifest: &Path) -> Result<StateSpace> {
    let man: Manifest = read_json(manifest)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let at = |p: &Path| dir.join(p);

    let fa = at(&man.a);
    let a = read_mtx(&fa)?;
    let (n, nc) = a.shape();
    if n != nc || n == 0 {
        return Err(shape_err(&fa, "A", (n, nc), "a non-empty square matrix".into()));
    }
    let fb = at(&man.b);
    let b = read_mtx(&fb)?.to_dense();
    if b.nrows() != n || b.ncols() == 0 {
        return Err(shape_err(&fb, "B", b.shape(), format!("{n} rows")));
    }
    let fc = at(&man.c);
    let c = read_mtx(&fc)?.to_dense();
    if c.ncols() != n || c.nrows() == 0 {
        return Err(shape_err(&fc, "C", c.shape(), format!("{n} columns")));
    }
    let (m, p) = (b.ncols(), c.nrows());
    let e = match &man.e {
        None => Operator::Identity(n),
        Some(f) => {
            let fe = at(f);
            let e = read_mtx(&fe)?;
            if e.shape() != (n, n) {
                return Err(shape_err(&fe, "E", e.shape(), format!("{n}x{n}")));
            }
            e.into_operator()
        }
    };
    let d = match &man.d {
        None => DMatrix::zeros(p, m),
        Some(f) => {
            let fd = at(f);
            let d = read_mtx(&fd)?.to_dense();
            if d.shape() != (p, m) {
                return Err(shape_err(&fd, "D", d.shape(), format!("{p}x{m}")));
            }
            d
        }
    };
    StateSpace::new(e, a.into_operator(), b, c, d)
}

/// Writes `<stem>_A.mtx` etc. next to `manifest` and the manifest itself.
/// Sparse operators are written in coordinate layout; an identity `E` is
/// omitted.
pub fn save_system(manifest: &Path, sys: &StateSpace) -> Result<()> {
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let stem = manifest
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("system")
        .to_string();
    let name = |x: &str| PathBuf::from(format!("{stem}_{x}.mtx"));
    let op = |file: &Path, o: &Operator| -> Result<()> {
        match o {
            Operator::Sparse(s) => write_mtx_sparse(file, s),
            other => write_mtx_dense(file, &other.to_dense()),
        }
    };
    op(&dir.join(name("A")), sys.a())?;
    write_mtx_dense(&dir.join(name("B")), sys.b())?;
    write_mtx_dense(&dir.join(name("C")), sys.c())?;
    write_mtx_dense(&dir.join(name("D")), sys.d())?;
    let e = if sys.e().is_identity() {
        None
    } else {
        op(&dir.join(name("E")), sys.e())?;
        Some(name("E"))
    };
    let man = Manifest {
        a: name("A"),
        b: name("B"),
        c: name("C"),
        e,
        d: Some(name("D")),
    };
    write_json(manifest, &man)
}

type Rows = Vec<Vec<f64>>;

fn to_rows<T: Scalar>(m: &DMatrix<T>, f: impl Fn(T) -> f64) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| f(m[(i, j)])).collect())
        .collect()
}

fn from_rows(rows: &Rows, what: &str, ncols_hint: Option<usize>) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map(|r| r.len()).or(ncols_hint).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Schema(format!("{what} has rows of unequal length")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// On-disk reduced model. Matrices are row-major nested arrays; complex
/// models add the `*_im` fields.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RomFile {
    pub method: String,
    pub r: usize,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    /// Required, though it may be `null`.
    #[serde(deserialize_with = "Option::deserialize")]
    pub hankel_used: Option<Vec<f64>>,
    #[serde(rename = "A_im", default, skip_serializing_if = "Option::is_none")]
    pub a_im: Option<Rows>,
    #[serde(rename = "B_im", default, skip_serializing_if = "Option::is_none")]
    pub b_im: Option<Rows>,
    #[serde(rename = "C_im", default, skip_serializing_if = "Option::is_none")]
    pub c_im: Option<Rows>,
    #[serde(rename = "D_im", default, skip_serializing_if = "Option::is_none")]
    pub d_im: Option<Rows>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A reduced model loaded from disk, real or complex.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRom {
    Real(ReducedModel<f64>),
    Complex(ReducedModel<Complex64>),
}

impl AnyRom {
    pub fn method(&self) -> Method {
        match self {
            AnyRom::Real(r) => r.method,
            AnyRom::Complex(r) => r.method,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            AnyRom::Real(r) => r.order(),
            AnyRom::Complex(r) => r.order(),
        }
    }
}

impl TransferFunction for AnyRom {
    fn inputs(&self) -> usize {
        match self {
            AnyRom::Real(r) => r.inputs(),
            AnyRom::Complex(r) => r.inputs(),
        }
    }

    fn outputs(&self) -> usize {
        match self {
            AnyRom::Real(r) => r.outputs(),
            AnyRom::Complex(r) => r.outputs(),
        }
    }

    fn eval(&self, s: Complex64) -> Result<CMatrix> {
        match self {
            AnyRom::Real(r) => r.eval(s),
            AnyRom::Complex(r) => r.eval(s),
        }
    }
}

impl<T: Scalar> From<&ReducedModel<T>> for RomFile {
    fn from(rom: &ReducedModel<T>) -> Self {
        let s = &rom.sys;
        let im = |m: &DMatrix<T>| (!T::REAL_ONLY).then(|| to_rows(m, |x| x.im_part()));
        RomFile {
            method: rom.method.as_str().to_string(),
            r: rom.order(),
            a: to_rows(&s.a, |x| x.re_part()),
            b: to_rows(&s.b, |x| x.re_part()),
            c: to_rows(&s.c, |x| x.re_part()),
            d: to_rows(&s.d, |x| x.re_part()),
            hankel_used: rom.hankel_used.clone(),
            a_im: im(&s.a),
            b_im: im(&s.b),
            c_im: im(&s.c),
            d_im: im(&s.d),
            notes: rom.notes.clone(),
        }
    }
}

impl RomFile {
    pub fn into_rom(self) -> Result<AnyRom> {
        let method: Method = self
            .method
            .parse()
            .map_err(|_| Error::Schema(format!("unknown method '{}'", self.method)))?;
        let r = self.r;
        let a = from_rows(&self.a, "A", Some(r))?;
        let b = from_rows(&self.b, "B", None)?;
        let c = from_rows(&self.c, "C", Some(r))?;
        let d = from_rows(&self.d, "D", None)?;
        if a.shape() != (r, r) {
            return Err(Error::Schema(format!("A is {}x{} but r = {r}", a.nrows(), a.ncols())));
        }
        let schema = |e: Error| Error::Schema(e.to_string());
        let imag = [&self.a_im, &self.b_im, &self.c_im, &self.d_im];
        if imag.iter().all(|x| x.is_none()) {
            let sys = Realization::new(a, b, c, d).map_err(schema)?;
            return Ok(AnyRom::Real(ReducedModel {
                sys,
                method,
                hankel_used: self.hankel_used,
                notes: self.notes,
            }));
        }
        let join = |re: DMatrix<f64>, im: &Option<Rows>, what: &str| -> Result<CMatrix> {
            let im = match im {
                Some(rows) => from_rows(rows, what, Some(re.ncols()))?,
                None => DMatrix::zeros(re.nrows(), re.ncols()),
            };
            if im.shape() != re.shape() {
                return Err(Error::Schema(format!("{what} real and imaginary parts differ in shape")));
            }
            Ok(re.zip_map(&im, Complex64::new))
        };
        let sys = Realization::new(
            join(a, &self.a_im, "A_im")?,
            join(b, &self.b_im, "B_im")?,
            join(c, &self.c_im, "C_im")?,
            join(d, &self.d_im, "D_im")?,
        )
        .map_err(schema)?;
        Ok(AnyRom::Complex(ReducedModel {
            sys,
            method,
            hankel_used: self.hankel_used,
            notes: self.notes,
        }))
    }
}

pub fn save_rom<T: Scalar>(path: &Path, rom: &ReducedModel<T>) -> Result<()> {
    write_json(path, &RomFile::from(rom))
}

pub fn load_rom(path: &Path) -> Result<AnyRom> {
    let file: RomFile = read_json(path)?;
    file.into_rom()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Sidecar describing a samples CSV.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleSidecar {
    pub m: usize,
    pub p: usize,
    pub kind: String,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Rows>,
    #[serde(rename = "H0", default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<Rows>,
    #[serde(rename = "H0_im", default, skip_serializing_if = "Option::is_none")]
    pub h0_im: Option<Rows>,
    pub rows: usize,
}

/// Sidecar path for a samples CSV: same stem, `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// CSV header for p×m samples, entries in row-major order.
pub fn samples_header(p: usize, m: usize) -> Vec<String> {
    let mut h = vec!["omega".to_string()];
    for i in 1..=p {
        for j in 1..=m {
            h.push(format!("re_{i}{j}"));
            h.push(format!("im_{i}{j}"));
        }
    }
    h
}

pub fn save_samples(path: &Path, set: &SampleSet) -> Result<()> {
    let (p, m) = (set.outputs(), set.inputs());
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(samples_header(p, m)).map_err(csv_err)?;
    for (w0, v) in set.nodes.iter().zip(&set.values) {
        let mut rec = vec![format!("{w0:e}")];
        for i in 0..p {
            for j in 0..m {
                rec.push(format!("{:e}", v[(i, j)].re));
                rec.push(format!("{:e}", v[(i, j)].im));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let sidecar = SampleSidecar {
        m,
        p,
        kind: set.kind.as_str().to_string(),
        d: set.d.as_ref().map(|d| to_rows(d, |x| x)),
        h0: set.h0.as_ref().map(|h| to_rows(h, |x| x.re)),
        h0_im: set.h0.as_ref().map(|h| to_rows(h, |x| x.im)),
        rows: set.len(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

/// Loads a samples CSV and its sidecar (see [`sidecar_path`]).
pub fn load_samples(path: &Path) -> Result<SampleSet> {
    load_samples_with(path, &sidecar_path(path))
}

pub fn load_samples_with(path: &Path, sidecar: &Path) -> Result<SampleSet> {
    let meta: SampleSidecar = read_json(sidecar)?;
    let kind: SampleKind = meta
        .kind
        .parse()
        .map_err(|_| Error::Schema(format!("{}: unknown kind '{}'", sidecar.display(), meta.kind)))?;
    let (p, m) = (meta.p, meta.m);
    if p == 0 || m == 0 {
        return Err(Error::Schema(format!("{}: p and m must be positive", sidecar.display())));
    }
    let width = 1 + 2 * p * m;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| parse_err(path, 1, e.to_string()))?,
        None => return Err(parse_err(path, 1, "empty file, expected a header")),
    };
    let want = samples_header(p, m);
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(parse_err(
            path,
            1,
            format!("header does not match a {p}x{m} sample layout; expected '{}'", want.join(",")),
        ));
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(path, line, format!("row {k}: {e}")))?;
        if rec.len() != width {
            return Err(parse_err(
                path,
                line,
                format!("row {k}: expected {width} columns, found {}", rec.len()),
            ));
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("row {k}: '{s}' is not a number")))
            })
            .collect::<Result<_>>()?;
        nodes.push(vals[0]);
        values.push(CMatrix::from_fn(p, m, |i, j| {
            let o = 1 + 2 * (i * m + j);
            Complex64::new(vals[o], vals[o + 1])
        }));
    }
    if nodes.len() != meta.rows {
        return Err(Error::Schema(format!(
            "{}: sidecar declares {} rows but the CSV has {}",
            path.display(),
            meta.rows,
            nodes.len()
        )));
    }
    let mut set = SampleSet::new(nodes, values, kind)?;
    if let Some(rows) = &meta.d {
        let d = from_rows(rows, "D", Some(m))?;
        if d.shape() != (p, m) {
            return Err(Error::Schema(format!("{}: D is not {p}x{m}", sidecar.display())));
        }
        set.d = Some(d);
    }
    if let Some(rows) = &meta.h0 {
        let re = from_rows(rows, "H0", Some(m))?;
        let im = match &meta.h0_im {
            Some(r) => from_rows(r, "H0_im", Some(m))?,
            None => DMatrix::zeros(re.nrows(), re.ncols()),
        };
        if re.shape() != (p, m) || im.shape() != (p, m) {
            return Err(Error::Schema(format!("{}: H0 is not {p}x{m}", sidecar.display())));
        }
        set.h0 = Some(re.zip_map(&im, Complex64::new));
    }
    Ok(set)
}

/// Writes a table with a header row; values use shortest round-trip form.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:e}"))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn reads_coordinate_and_array() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 -2\n2 1 1\n3 3 -4.5\n",
        );
        let MtxMatrix::Sparse(s) = read_mtx(&p).unwrap() else { panic!("expected sparse") };
        let d = s.to_dense();
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(1, 0)], 1.0);
        assert_eq!(d[(2, 2)], -4.5);
        let q = write(dir.path(), "b.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
        let MtxMatrix::Dense(m) = read_mtx(&q).unwrap() else { panic!("expected dense") };
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3\n");
        match read_mtx(&p).unwrap_err() {
            Error::Parse { line, path, .. } => {
                assert_eq!(line, 4);
                assert!(path.ends_with("bad.mtx"));
            }
            e => panic!("unexpected {e}"),
        }
        let q = write(dir.path(), "short.mtx", "%%MatrixMarket matrix array real general\n2 1\n1\n");
        assert!(matches!(read_mtx(&q), Err(Error::Parse { .. })));
    }

    #[test]
    fn sample_layout_is_row_major() {
        let h = samples_header(2, 2);
        assert_eq!(h[5], "re_21");
        assert_eq!(h[6], "im_21");
    }
}
