use crate::error::Result;
use crate::loss::Loss;
use crate::network::Network;
use crate::optim::Optimizer;
use crate::tensor::Tensor;

/// Mean batch loss and the flat parameter gradient, without updating.
pub fn loss_and_grad(net: &Network, loss: Loss, input: &Tensor, target: &Tensor) -> Result<(f64, Vec<f64>)> {
    let trace = net.forward(input)?;
    let (value, grad_out) = loss.evaluate(trace.output(), target)?;
    let mut grads = vec![0.0; net.param_count()];
    net.backward(&trace, &grad_out, Some(&mut grads))?;
    Ok((value, grads))
}

/// One optimizer step on the mean batch loss; returns the pre-update loss.
pub fn train_step(net: &mut Network, loss: Loss, input: &Tensor, target: &Tensor, opt: &mut Optimizer) -> Result<f64> {
    let (value, grads) = loss_and_grad(net, loss, input, target)?;
    opt.step(net.params_mut(), &grads)?;
    Ok(value)
}
