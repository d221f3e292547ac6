#include "synth.hpp"

#include <cstdio>

#include "error.hpp"
#include "random.hpp"
#include "unicode.hpp"

namespace deid::synth {

namespace {

using Pool = std::vector<std::string>;

const Pool kMonths{"enero", "febrero", "marzo", "abril", "mayo", "junio", "julio",
                   "agosto", "septiembre", "octubre", "noviembre", "diciembre"};

const Pool kHospitalKinds{"Hospital", "Clínica", "Hospital Universitario", "Centro de Salud",
                          "Hospital General", "Hospital Clínico"};

const Pool kHospitalNames{
    "Marseille", "La Paz", "San Carlos", "Santa Lucía", "Gregorio Marañón", "Doce de Octubre",
    "Ramón y Cajal", "La Fe", "Virgen del Rocío", "Son Espases", "Valdecilla", "Cruces",
    "Donostia", "Miguel Servet", "Reina Sofía", "Virgen de la Arrixaca", "Puerta de Hierro",
    "Infanta Leonor", "Severo Ochoa", "La Princesa", "Niño Jesús", "San Pedro", "Santa Cristina",
    "Los Madroños", "Moncloa", "Quirón", "San Rafael", "Nuestra Señora de Sonsoles",
    "Río Hortega", "Carlos Haya", "Costa del Sol", "Virgen de las Nieves", "San Cecilio",
    "Torrecárdenas", "Arnau de Vilanova", "Vall d'Hebron", "Bellvitge", "Germans Trias",
    "Sant Pau", "Parc Taulí", "Dr. Negrín", "Insular", "La Candelaria", "Montecelo",
    "Álvaro Cunqueiro", "Lucus Augusti", "Basurto", "Galdakao", "Txagorritxu", "Alcorcón",
    "Getafe", "Móstoles", "Fuenlabrada", "El Escorial", "Guadarrama", "Tajo", "Henares",
    "Sureste", "Santa Bárbara", "Los Arcos"};

const Pool kSurnames{
    "Lopez", "García", "Martínez", "Sánchez", "Pérez", "Gómez", "Martín", "Jiménez", "Ruiz",
    "Hernández", "Díaz", "Moreno", "Álvarez", "Muñoz", "Romero", "Alonso", "Gutiérrez",
    "Navarro", "Torres", "Domínguez", "Vázquez", "Ramos", "Gil", "Ramírez", "Serrano",
    "Blanco", "Suárez", "Molina", "Morales", "Ortega", "Delgado", "Castro", "Ortiz", "Rubio",
    "Marín", "Sanz", "Iglesias", "Medina", "Garrido", "Cortés", "Castillo", "Santos", "Lozano",
    "Guerrero", "Cano", "Prieto", "Méndez", "Cruz", "Calvo", "Gallego", "Vidal", "León",
    "Márquez", "Herrera", "Peña", "Flores", "Cabrera", "Campos", "Vega", "Fuentes", "Sancho",
    "Etxeberria", "Goikoetxea", "Arrieta", "Otxoa", "Zubizarreta"};

const Pool kListedFemale{"María", "Carmen", "Ana", "Isabel", "Laura", "Lucía", "Pilar", "Elena"};
const Pool kListedMale{"Antonio", "José", "Manuel", "Francisco", "David", "Javier", "Juan", "Carlos"};
const Pool kUnlistedGiven{"Yeray", "Naiara", "Iker", "Ainhoa", "Uxue", "Aitor", "Xabier", "Itziar",
                          "Oihane", "Unai", "Nerea", "Eneko", "Leire", "Gorka", "Amaia", "Haizea",
                          "Txomin", "Maialen", "Asier", "Garazi"};

const Pool kSex{"varón", "mujer", "hombre", "femenino", "masculino", "niña"};
const Pool kKinship{"madre", "padre", "hermano", "hermana", "hijo", "hija", "abuelo", "abuela",
                    "esposa", "marido", "tío", "tía", "prima"};
const Pool kLocation{"Madrid", "Sevilla", "Valencia", "Bilbao", "Zaragoza", "Málaga", "Murcia",
                     "Palma", "Córdoba", "Valladolid", "Vigo", "Gijón", "Granada", "Alicante",
                     "Toledo", "Cáceres", "Badajoz", "Lugo", "Ourense", "Huesca", "Teruel",
                     "Soria", "Segovia", "Ávila", "Cuenca", "Jaén", "Almería", "Cádiz",
                     "Huelva", "Pamplona", "Logroño", "Burgos", "León", "Salamanca"};
const Pool kJob{"albañil", "enfermera", "profesor", "camionero", "agricultor", "administrativa",
                "carpintero", "cocinero", "peluquera", "electricista", "abogada", "pintor",
                "fontanero", "conductor de autobús", "maestra", "mecánico"};

const std::string& pick(const Pool& p, Rng& rng) { return p[uniform_index(rng, p.size())]; }

bool chance(Rng& rng, double p) { return uniform_real(rng) < p; }

std::string two(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

int day(Rng& rng) { return static_cast<int>(uniform_int(rng, 1, 28)); }
int month(Rng& rng) { return static_cast<int>(uniform_int(rng, 1, 12)); }
int year(Rng& rng) { return static_cast<int>(uniform_int(rng, 2005, 2019)); }

std::string date_value(const std::string& variant, Rng& rng) {
  if (variant == "day") return std::to_string(day(rng));
  if (variant == "daymonth") return std::to_string(day(rng)) + " de " + pick(kMonths, rng);
  if (variant == "year") return std::to_string(year(rng));
  const double r = uniform_real(rng);
  const int d = day(rng), m = month(rng), y = year(rng);
  if (r < 0.28) return two(d) + "/" + two(m) + "/" + std::to_string(y);
  if (r < 0.36) return std::to_string(d) + "/" + std::to_string(m) + "/" + std::to_string(y);
  if (r < 0.54) return std::to_string(d) + " de " + kMonths[m - 1] + " de " + std::to_string(y);
  if (r < 0.68) return std::to_string(d) + " de " + kMonths[m - 1];
  if (r < 0.76) return kMonths[m - 1] + " de " + std::to_string(y);
  if (r < 0.86) return two(d) + "-" + two(m) + "-" + two(y % 100);
  return two(d) + "." + two(m) + "." + std::to_string(y);
}

std::string time_value(Rng& rng) {
  const int h = static_cast<int>(uniform_int(rng, 0, 23));
  const int m = static_cast<int>(uniform_index(rng, 12)) * 5;
  const double r = uniform_real(rng);
  if (r < 0.55) return two(h) + ":" + two(m);
  if (r < 0.75) return two(h) + ":" + two(m) + " h";
  if (r < 0.9) return std::to_string(h) + " horas";
  return std::to_string(h) + "h" + two(m);
}

std::string age_value(const std::string& variant, Rng& rng) {
  if (variant == "half") return std::to_string(uniform_int(rng, 1, 12)) + " años y medio";
  const double r = uniform_real(rng);
  if (r < 0.65) return std::to_string(uniform_int(rng, 16, 95)) + " años";
  if (r < 0.8) return std::to_string(uniform_int(rng, 2, 11)) + " meses";
  if (r < 0.88) return std::to_string(uniform_int(rng, 1, 9)) + " años y medio";
  if (r < 0.94) return std::to_string(uniform_int(rng, 2, 20)) + " días";
  return std::to_string(uniform_int(rng, 2, 30)) + " semanas";
}

std::string doctor_value(const std::string& variant, Rng& rng) {
  std::string names = pick(kSurnames, rng);
  if (chance(rng, 0.35)) names += " " + pick(kSurnames, rng);
  if (variant == "bare") return names;
  const bool female = chance(rng, 0.5);
  static const Pool female_h{"Dra", "Dra.", "doctora"};
  static const Pool male_h{"Dr", "Dr.", "doctor"};
  std::string out;
  if (variant == "article" || (variant.empty() && chance(rng, 0.4))) out = female ? "la " : "el ";
  return out + pick(female ? female_h : male_h, rng) + " " + names;
}

std::string patient_value(Rng& rng) {
  std::string given;
  if (chance(rng, 0.5))
    given = chance(rng, 0.5) ? pick(kListedFemale, rng) : pick(kListedMale, rng);
  else
    given = pick(kUnlistedGiven, rng);
  return given + " " + pick(kSurnames, rng);
}

std::string other_value(Rng& rng) {
  return std::to_string(uniform_int(rng, 100000, 999999));
}

std::string hospital_value(Rng& rng) { return pick(kHospitalKinds, rng) + " " + pick(kHospitalNames, rng); }

std::string slot_value(const std::string& category, const std::string& variant, Rng& rng) {
  if (category == "Date") return date_value(variant, rng);
  if (category == "Time") return time_value(rng);
  if (category == "Age") return age_value(variant, rng);
  if (category == "Doctor") return doctor_value(variant, rng);
  if (category == "Patient") return patient_value(rng);
  if (category == "Hospital") {
    if (variant == "clinic") return "la Clínica " + pick(kHospitalNames, rng);
    return hospital_value(rng);
  }
  if (category == "Sex") {
    if (!variant.empty()) return variant;
    return pick(kSex, rng);
  }
  if (category == "Kinship") return pick(kKinship, rng);
  if (category == "Location") return pick(kLocation, rng);
  if (category == "Job") return pick(kJob, rng);
  if (category == "Other") return other_value(rng);
  throw Error(ErrorCode::kUnknownCategory, "no value generator for '" + category + "'");
}

void capitalize_first(std::u32string& s) {
  if (!s.empty()) s[0] = unicode::to_upper(s[0]);
}

struct Rendered {
  std::u32string text;
  std::vector<Annotation> spans;  // offsets relative to text
};

Rendered render(const std::string& tmpl, Rng& rng) {
  Rendered out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find('{', i);
    if (open == std::string::npos) {
      out.text += unicode::decode(tmpl.substr(i));
      break;
    }
    out.text += unicode::decode(tmpl.substr(i, open - i));
    auto close = tmpl.find('}', open);
    if (close == std::string::npos)
      throw Error(ErrorCode::kInvalidArgument, "unterminated slot in template: " + tmpl);
    std::string slot = tmpl.substr(open + 1, close - open - 1);
    std::string variant;
    if (auto colon = slot.find(':'); colon != std::string::npos) {
      variant = slot.substr(colon + 1);
      slot.resize(colon);
    }
    auto value = unicode::decode(slot_value(slot, variant, rng));
    if (open == 0) capitalize_first(value);
    Annotation a;
    a.category = slot;
    a.start = out.text.size();
    out.text += value;
    a.end = out.text.size();
    out.spans.push_back(std::move(a));
    i = close + 1;
  }
  return out;
}

}  // namespace

std::map<std::string, double> default_targets() {
  return {{"Date", 39.0},  {"Hospital", 18.0}, {"Age", 13.0},    {"Time", 11.0},
          {"Doctor", 9.0}, {"Sex", 5.0},       {"Kinship", 3.0}, {"Location", 1.0},
          {"Patient", 1.0}, {"Job", 1.0},      {"Other", 0.5}};
}

std::map<std::string, std::vector<std::string>> default_templates() {
  return {
      {"Date",
       {"Ingresa el {Date} por dolor abdominal de dos días de evolución.",
        "Fecha de alta: {Date}.",
        "Se realiza control ( {Date:day} y {Date:daymonth} ) sin incidencias.",
        "Revisión en consultas externas el {Date}.",
        "Intervenido de apendicitis en {Date:year}.",
        "Acude a urgencias el {Date} a las {Time}.",
        "Última analítica del {Date} dentro de la normalidad.",
        "Pendiente de resonancia programada para el {Date}.",
        "Fecha de ingreso {Date}, fecha de alta {Date}.",
        "Diagnosticado de diabetes tipo 2 en {Date:year}, en tratamiento con metformina."}},
      {"Hospital",
       {"Trasladado al {Hospital} para valoración por cirugía.",
        "Acudirá a {Hospital:clinic} para completar estudio.",
        "Procedente del {Hospital}, donde ingresó por neumonía.",
        "Seguimiento en {Hospital} por su neumólogo.",
        "Remitido desde {Hospital} con informe de alta.",
        "Se contacta con el servicio de radiología del {Hospital}."}},
      {"Age",
       {"Paciente de {Age} que acude por fiebre.",
        "{Sex} de {Age} con antecedentes de hipertensión arterial.",
        "{Sex:Niño} de {Age:half} traído por sus padres.",
        "Edad: {Age}, sin alergias conocidas.",
        "Paciente de {Age} de edad en seguimiento por cardiología.",
        "A los {Age} presentó un episodio convulsivo."}},
      {"Time",
       {"A las {Time} presenta episodio de dolor torácico.",
        "Se administra analgesia a las {Time} con buena respuesta.",
        "Hora de llegada a urgencias: {Time}.",
        "Valorado a las {Time} por el equipo de guardia."}},
      {"Doctor",
       {"Valorado por {Doctor:article}.",
        "Comentado con {Doctor}, de guardia esta noche.",
        "Firmado: {Doctor:bare}.",
        "Informe revisado por {Doctor}.",
        "Se comenta el caso con {Doctor:article}, que indica ingreso."}},
      {"Sex",
       {"Sexo: {Sex}.", "Se trata de un {Sex:varón} con buen estado general.",
        "{Sex} con dolor lumbar mecánico."}},
      {"Kinship",
       {"Antecedentes familiares: {Kinship} con diabetes.", "Acompañado por su {Kinship}.",
        "Refiere que su {Kinship} falleció de cáncer de colon."}},
      {"Location",
       {"Natural de {Location}.", "Reside en {Location} con su familia.",
        "Vive en {Location} desde hace años."}},
      {"Patient",
       {"{Patient} refiere mejoría clínica.", "Se explica a {Patient} el procedimiento.",
        "Paciente {Patient} pendiente de resultados."}},
      {"Job",
       {"Trabaja como {Job}.", "De profesión {Job}, actualmente de baja.",
        "Jubilado, antes trabajaba de {Job}."}},
      {"Other",
       {"Número de historia clínica {Other}.", "Nº de afiliación {Other}."}},
  };
}

std::vector<std::string> default_fillers() {
  return {
      "Tratamiento con amoxicilina durante 10 días.",
      "Control analítico en 3 meses.",
      "Reposo relativo durante 48 horas.",
      "Se pauta paracetamol 1 g cada 8 horas.",
      "Exploración física sin hallazgos relevantes.",
      "Buen estado general, afebril y eupneico.",
      "No alergias medicamentosas conocidas.",
      "Auscultación cardiopulmonar normal.",
      "Abdomen blando y depresible, no doloroso a la palpación.",
      "Se solicita ecografía abdominal.",
      "Evolución favorable durante el ingreso.",
      "Dieta blanda y abundantes líquidos.",
      "Revisar en 2 semanas si persisten los síntomas.",
      "Tensión arterial 130/80 mmHg, frecuencia cardiaca 78 lpm.",
      "La doctora de guardia indica observación.",
  };
}

const std::vector<std::string>& listed_given_names() {
  static const Pool all = [] {
    Pool p = kListedFemale;
    p.insert(p.end(), kListedMale.begin(), kListedMale.end());
    return p;
  }();
  return all;
}

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig c;
  c.templates = default_templates();
  c.fillers = default_fillers();
  c.targets = default_targets();
  return c;
}

void GeneratorConfig::validate() const {
  if (min_sentences == 0 || min_sentences > max_sentences)
    throw Error(ErrorCode::kInvalidArgument, "sentence range must satisfy 0 < min <= max");
  if (filler_rate < 0 || filler_rate >= 1)
    throw Error(ErrorCode::kInvalidArgument, "filler_rate must be in [0, 1)");
  double total = 0;
  for (const auto& [cat, share] : targets) {
    if (share < 0) throw Error(ErrorCode::kInvalidArgument, "negative target for " + cat);
    if (share > 0 && templates.find(cat) == templates.end())
      throw Error(ErrorCode::kInvalidArgument, "no templates for category " + cat);
    total += share;
  }
  if (total < 95.0 || total > 105.0)
    throw Error(ErrorCode::kInvalidArgument, "category targets must sum to about 100");
  if (filler_rate > 0 && fillers.empty())
    throw Error(ErrorCode::kInvalidArgument, "filler_rate > 0 but no fillers");
}

Corpus generate(const GeneratorConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.seed, 0x5e7));
  std::vector<std::string> cats;
  std::vector<double> shares;
  double target_sum = 0;
  for (const auto& [cat, share] : config.targets) target_sum += share;
  // Rounded published shares need not sum to exactly 100.
  for (const auto& [cat, share] : config.targets) {
    cats.push_back(cat);
    shares.push_back(share / target_sum);
  }
  std::map<std::string, double> counts;
  double total = 0;

  // Picks the category whose realized count lags furthest behind its target,
  // sampled in proportion to the lag so the output stays varied.
  auto next_category = [&]() -> const std::string& {
    std::vector<double> w(cats.size());
    double sum = 0;
    for (std::size_t k = 0; k < cats.size(); ++k) {
      w[k] = std::max(0.0, shares[k] * (total + 1) - counts[cats[k]]) + 1e-3 * shares[k];
      sum += w[k];
    }
    double r = uniform_real(rng) * sum;
    for (std::size_t k = 0; k < cats.size(); ++k) {
      if (r < w[k]) return cats[k];
      r -= w[k];
    }
    return cats.back();
  };

  Corpus corpus;
  corpus.reserve(config.n_documents);
  for (std::size_t d = 0; d < config.n_documents; ++d) {
    char id[32];
    std::snprintf(id, sizeof id, "doc_%05zu", d);
    Document doc;
    doc.id = id;
    auto n = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(config.min_sentences),
                                                  static_cast<std::int64_t>(config.max_sentences)));
    for (std::size_t s = 0; s < n; ++s) {
      std::string tmpl;
      if (chance(rng, config.filler_rate)) {
        tmpl = pick(config.fillers, rng);
      } else {
        const auto& pool = config.templates.at(next_category());
        tmpl = pick(pool, rng);
      }
      auto r = render(tmpl, rng);
      if (!doc.text.empty()) doc.text += chance(rng, 0.25) ? U'\n' : U' ';
      const std::size_t base = doc.text.size();
      doc.text += r.text;
      for (auto& a : r.spans) {
        a.start += base;
        a.end += base;
        counts[a.category] += 1;
        total += 1;
        doc.annotations.push_back(std::move(a));
      }
    }
    doc.text += U'\n';
    for (auto& a : doc.annotations) a.surface = doc.slice(a.start, a.end);
    renumber(doc.annotations);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

std::map<std::string, double> category_shares(const Corpus& corpus) {
  std::map<std::string, double> out;
  double total = 0;
  for (const auto& d : corpus)
    for (const auto& a : d.annotations) {
      out[a.category] += 1;
      total += 1;
    }
  if (total > 0)
    for (auto& [c, v] : out) v = 100.0 * v / total;
  return out;
}

}  // namespace deid::synth
