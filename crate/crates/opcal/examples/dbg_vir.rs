use opcal::chiral::*;
use opcal::fdmod::ModuleSpec;
use opcal::{QModElem, QPoly, Rat};
use std::collections::BTreeMap;

fn main() {
    let spec = ModuleSpec::free_rank1("L", 2);
    let mut data = IntegralBracketData::<Rat>::default();
    data.lambda_brackets.insert(
        (0, 0),
        QModElem::monomial(&spec, 1, 0, QPoly::parse("d + 2*l1").unwrap()).unwrap(),
    );
    let op = ChiralOperad::<Rat>::new(spec.clone(), 3);
    match x_from_integral_bracket(&op, &data) {
        Ok(x) => println!("ok: {:?}", x.seeds().len()),
        Err(e) => println!("err: {e}"),
    }
    // Rebuild pieces by hand to inspect.
    let i00 = QModElem::monomial(&spec, 1, 0, QPoly::parse("d*l1 + l1^2").unwrap()).unwrap();
    let as2 = QModElem::new(&spec, 2, i00.comps().clone()).unwrap().scale(&-opcal::rat(1));
    let r1 = opcal::fdmod::quotient_project(&spec, &as2);
    println!("R1[(0,0)] = {}", r1.render(&spec));
    let i10 = QModElem::monomial(&spec, 1, 0, QPoly::parse("-1/2*d*l1^2 - 2/3*l1^3").unwrap()).unwrap();
    let as2 = QModElem::new(&spec, 2, i10.comps().clone()).unwrap().scale(&-opcal::rat(1));
    let r1_10 = opcal::fdmod::quotient_project(&spec, &as2);
    println!("R1[(1,0)] = {}", r1_10.render(&spec));
    let lam1 = QPoly::parse("l1").unwrap();
    let r2 = r1_10.add(&r1.mul_poly(&spec, &lam1)).scale(&-opcal::rat(1));
    println!("R2[(0,0)] = {}", r2.render(&spec));
    let back = r2.lambda_derivative(&spec, 2, 1);
    println!("descent(R2) = {}", back.render(&spec));
}
