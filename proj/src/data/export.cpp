#include <fstream>

#include "jfa/adapt.hpp"
#include "jfa/data.hpp"

namespace jfa {

void export_adapted(const WeightModel& model, const Dataset& dataset, ClassId label, std::ostream& out) {
  check_model_matches(model, dataset);
  const ClassEmbedding* target = dataset.find_class(label);
  if (!target) throw ValidationError("export: unknown class " + std::to_string(label));
  const JointSystem system = assemble_joint_system(model.W, model.omega);
  if (!system.is_pd()) throw NumericalError("export: model's joint system is not positive definite");

  out << "# class " << label << "\n# instance_id\tphi\tz_t\tz_s\n";
  for (const auto& x : dataset.instances) {
    const AdaptedPair a = adapt_closed_form(system, assemble_pair(x.phi, target->psi, model.omega));
    out << x.id << '\t' << format_reals(x.phi) << '\t' << format_reals(a.z_t) << '\t' << format_reals(a.z_s) << '\n';
  }
}

void export_adapted(const WeightModel& model, const Dataset& dataset, ClassId label,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  export_adapted(model, dataset, label, out);
  if (!out) throw IoError("write failure: " + path.string());
}

}  // namespace jfa
